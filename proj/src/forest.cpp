#include "biasaudit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "biasaudit/errors.hpp"
#include "biasaudit/rng.hpp"
#include "biasaudit/textutil.hpp"

namespace biasaudit {

double gini_impurity(std::span<const std::uint64_t> class_counts) {
  std::uint64_t total = 0;
  for (auto c : class_counts) total += c;
  if (total == 0) throw DataError("gini impurity of an empty count vector");
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

std::string schema_fingerprint(const DataTable& table,
                               const std::vector<std::string>& feature_names) {
  Fnv64 h;
  for (const auto& name : feature_names) {
    const Column* col = table.find_column(name);
    if (col == nullptr) throw DataError("schema fingerprint: column '" + name + "' not found");
    h.update(name);
    h.update_byte(0);
    h.update(to_string(col->schema.kind));
    h.update_byte(0);
    if (!col->is_numeric()) {
      for (const auto& v : col->dict.values()) {
        h.update(v);
        h.update_byte(1);
      }
    }
    h.update_byte(2);
  }
  return h.hex();
}

std::vector<std::size_t> trainable_columns(const DataTable& table, bool include_protected) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < table.n_cols(); ++i) {
    const auto role = table.column(i).schema.role;
    if (role == ColumnRole::feature ||
        (include_protected && role == ColumnRole::protected_attr)) {
      out.push_back(i);
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> draw_bootstrap(Rng& rng, std::size_t n_rows) {
  std::vector<std::size_t> rows(n_rows);
  for (auto& r : rows) r = rng.next_below(n_rows);
  return rows;
}

}  // namespace

std::vector<std::size_t> bootstrap_indices(std::uint64_t master_seed, int tree_index,
                                           std::size_t n_rows) {
  Rng rng(mix_seed(master_seed, static_cast<std::uint64_t>(tree_index)));
  return draw_bootstrap(rng, n_rows);
}

namespace {

// Column-major view of the trainable columns; numeric cells already imputed.
struct TrainFeature {
  ColumnKind kind;
  std::vector<double> num;                  // numeric values, no NaN left
  const std::vector<std::int32_t>* codes = nullptr;  // categorical codes
};

struct TrainMatrix {
  std::vector<TrainFeature> features;
  std::size_t n_rows = 0;
};

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return std::midpoint(v[n / 2 - 1], v[n / 2]);
}

struct BestSplit {
  bool valid = false;
  double weighted = std::numeric_limits<double>::infinity();
  std::int32_t feature = -1;
  bool is_numeric = false;
  double threshold = 0.0;
  std::int32_t category = -1;
};

double gini_from(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainMatrix& matrix, std::span<const std::int32_t> labels,
              std::size_t n_classes, const ForestConfig& config, int mtry, Rng& rng)
      : m_(matrix), y_(labels), k_(n_classes), cfg_(config), mtry_(mtry), rng_(rng) {}

  Tree build(std::vector<std::size_t> bootstrap_rows) {
    rows_ = std::move(bootstrap_rows);
    tree_.nodes.clear();
    build_node(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t build_node(std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    std::vector<std::uint64_t> counts(k_, 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(y_[rows_[i]])];

    const auto node_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const double parent_gini = gini_from(counts, n);
    const bool pure = std::count(counts.begin(), counts.end(), 0) >= static_cast<long>(k_) - 1;
    const bool depth_capped = cfg_.max_depth >= 0 && depth >= cfg_.max_depth;
    if (pure || depth_capped || n < static_cast<std::size_t>(cfg_.min_samples_split)) {
      make_leaf(node_index, counts);
      return node_index;
    }

    BestSplit best = find_split(begin, end, counts);
    // Require a strict impurity decrease; otherwise this node stays a leaf.
    if (!best.valid || best.weighted >= parent_gini - 1e-12) {
      make_leaf(node_index, counts);
      return node_index;
    }

    auto goes_left = [&](std::size_t row) {
      const TrainFeature& f = m_.features[static_cast<std::size_t>(best.feature)];
      if (best.is_numeric) return f.num[row] <= best.threshold;
      return (*f.codes)[row] == best.category;
    };
    auto mid_it = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                        goes_left);
    const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());

    TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];
    node.kind = best.is_numeric ? TreeNode::numeric_split : TreeNode::categorical_split;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.category = best.category;

    const std::int32_t left = build_node(begin, mid, depth + 1);
    const std::int32_t right = build_node(mid, end, depth + 1);
    tree_.nodes[static_cast<std::size_t>(node_index)].left = left;
    tree_.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  }

  void make_leaf(std::int32_t node_index, const std::vector<std::uint64_t>& counts) {
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];
    node.kind = TreeNode::leaf;
    node.counts.assign(counts.begin(), counts.end());
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
      if (counts[c] > counts[best]) best = c;  // ties keep the lowest code
    }
    node.predicted = static_cast<std::int32_t>(best);
  }

  BestSplit find_split(std::size_t begin, std::size_t end,
                       const std::vector<std::uint64_t>& node_counts) {
    const std::size_t n = end - begin;
    const std::size_t n_feat = m_.features.size();

    // Uniform feature subset, then ascending order so equal-gain ties break
    // on declaration order.
    sample_.resize(n_feat);
    std::iota(sample_.begin(), sample_.end(), 0);
    const auto m = static_cast<std::size_t>(mtry_);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + rng_.next_below(n_feat - i);
      std::swap(sample_[i], sample_[j]);
    }
    chosen_.assign(sample_.begin(), sample_.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(chosen_.begin(), chosen_.end());

    BestSplit best;
    std::vector<std::uint64_t> left(k_, 0);

    for (auto fi : chosen_) {
      const TrainFeature& f = m_.features[fi];
      if (f.kind == ColumnKind::numeric) {
        num_scratch_.clear();
        num_scratch_.reserve(n);
        for (std::size_t i = begin; i < end; ++i) {
          const auto row = rows_[i];
          num_scratch_.emplace_back(f.num[row], y_[row]);
        }
        std::sort(num_scratch_.begin(), num_scratch_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::fill(left.begin(), left.end(), 0);
        std::uint64_t nl = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          ++left[static_cast<std::size_t>(num_scratch_[i].second)];
          ++nl;
          if (num_scratch_[i].first < num_scratch_[i + 1].first) {
            const double weighted =
                weighted_gini(left, nl, node_counts, static_cast<std::uint64_t>(n));
            if (weighted < best.weighted) {
              best.valid = true;
              best.weighted = weighted;
              best.feature = static_cast<std::int32_t>(fi);
              best.is_numeric = true;
              best.threshold = std::midpoint(num_scratch_[i].first, num_scratch_[i + 1].first);
              best.category = -1;
            }
          }
        }
      } else {
        cat_scratch_.clear();
        cat_scratch_.reserve(n);
        for (std::size_t i = begin; i < end; ++i) {
          const auto row = rows_[i];
          cat_scratch_.emplace_back((*f.codes)[row], y_[row]);
        }
        std::sort(cat_scratch_.begin(), cat_scratch_.end());
        std::size_t s = 0;
        while (s < n) {
          std::size_t t = s;
          std::fill(left.begin(), left.end(), 0);
          while (t < n && cat_scratch_[t].first == cat_scratch_[s].first) {
            ++left[static_cast<std::size_t>(cat_scratch_[t].second)];
            ++t;
          }
          const std::uint64_t nl = t - s;
          if (nl < n) {  // one-vs-rest needs a non-empty right side
            const double weighted =
                weighted_gini(left, nl, node_counts, static_cast<std::uint64_t>(n));
            if (weighted < best.weighted) {
              best.valid = true;
              best.weighted = weighted;
              best.feature = static_cast<std::int32_t>(fi);
              best.is_numeric = false;
              best.threshold = 0.0;
              best.category = cat_scratch_[s].first;
            }
          }
          s = t;
        }
      }
    }
    return best;
  }

  double weighted_gini(const std::vector<std::uint64_t>& left, std::uint64_t nl,
                       const std::vector<std::uint64_t>& node_counts, std::uint64_t n) {
    const std::uint64_t nr = n - nl;
    right_.resize(k_);
    for (std::size_t c = 0; c < k_; ++c) right_[c] = node_counts[c] - left[c];
    return (static_cast<double>(nl) * gini_from(left, nl) +
            static_cast<double>(nr) * gini_from(right_, nr)) /
           static_cast<double>(n);
  }

  const TrainMatrix& m_;
  std::span<const std::int32_t> y_;
  std::size_t k_;
  const ForestConfig& cfg_;
  int mtry_;
  Rng& rng_;

  std::vector<std::size_t> rows_;
  Tree tree_;
  std::vector<std::size_t> sample_;
  std::vector<std::size_t> chosen_;
  std::vector<std::pair<double, std::int32_t>> num_scratch_;
  std::vector<std::pair<std::int32_t, std::int32_t>> cat_scratch_;
  std::vector<std::uint64_t> right_;
};

Tree build_one_tree(const TrainMatrix& matrix, std::span<const std::int32_t> labels,
                    std::size_t n_classes, const ForestConfig& config, int mtry,
                    std::uint64_t master_seed, int tree_index) {
  Rng rng(mix_seed(master_seed, static_cast<std::uint64_t>(tree_index)));
  // The bootstrap consumes the first n draws; bootstrap_indices() regenerates
  // exactly these.
  auto rows = draw_bootstrap(rng, matrix.n_rows);
  TreeBuilder builder(matrix, labels, n_classes, config, mtry, rng);
  return builder.build(std::move(rows));
}

std::int32_t tree_predict(const Tree& tree, const ForestModel& model,
                          const std::vector<const Column*>& cols, std::size_t row) {
  std::int32_t at = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    if (node.kind == TreeNode::leaf) return node.predicted;
    const Column* col = cols[static_cast<std::size_t>(node.feature)];
    bool left;
    if (node.kind == TreeNode::numeric_split) {
      double v = col->values[row];
      if (std::isnan(v)) v = model.features[static_cast<std::size_t>(node.feature)].impute;
      left = v <= node.threshold;
    } else {
      // Unseen categories take the "not equal" branch.
      left = col->codes[row] == node.category;
    }
    at = left ? node.left : node.right;
  }
}

std::vector<const Column*> bind_columns(const ForestModel& model, const DataTable& table) {
  const std::vector<std::string> names = [&] {
    std::vector<std::string> out;
    out.reserve(model.features.size());
    for (const auto& f : model.features) out.push_back(f.name);
    return out;
  }();
  const std::string fp = schema_fingerprint(table, names);
  if (fp != model.schema_fingerprint) {
    throw DataError("schema mismatch: table fingerprint " + fp + " != model fingerprint " +
                    model.schema_fingerprint + " (names, kinds, or dictionary differ)");
  }
  std::vector<const Column*> cols;
  cols.reserve(model.features.size());
  for (const auto& f : model.features) cols.push_back(table.find_column(f.name));
  return cols;
}

std::int32_t majority(std::span<const std::uint32_t> votes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;  // ties keep the lowest code
  }
  return static_cast<std::int32_t>(best);
}

}  // namespace

ForestModel train_forest(const DataTable& features, std::span<const std::int32_t> labels,
                         std::size_t n_classes, const ForestConfig& config,
                         const TrainInfo& info) {
  const std::size_t n = features.n_rows();
  if (labels.size() != n) throw DataError("label vector length does not match table rows");
  if (config.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (config.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  if (n < static_cast<std::size_t>(config.min_samples_split)) {
    throw DataError("training set has " + std::to_string(n) + " rows, need at least " +
                    std::to_string(config.min_samples_split));
  }

  std::unordered_set<std::int32_t> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw DataError("degenerate task: training labels have " +
                    std::to_string(distinct.size()) + " distinct value(s)");
  }
  if (n_classes < 2) throw DataError("n_classes must be >= 2");
  for (auto y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes) {
      throw DataError("label code " + std::to_string(y) + " out of range");
    }
  }

  const auto col_indices = trainable_columns(features, config.include_protected_features);
  if (col_indices.empty()) throw DataError("empty feature set: no trainable columns");

  ForestModel model;
  TrainMatrix matrix;
  matrix.n_rows = n;
  for (auto ci : col_indices) {
    const Column& col = features.column(ci);
    ModelFeature mf;
    mf.name = col.schema.name;
    mf.kind = col.schema.kind;
    TrainFeature tf;
    tf.kind = col.schema.kind;
    if (col.is_numeric()) {
      std::vector<double> present;
      present.reserve(n);
      for (double v : col.values) {
        if (!std::isnan(v)) present.push_back(v);
      }
      mf.impute = median_of(std::move(present));
      tf.num = col.values;
      for (auto& v : tf.num) {
        if (std::isnan(v)) v = mf.impute;
      }
    } else {
      mf.dict = col.dict.values();
      tf.codes = &col.codes;
    }
    model.features.push_back(std::move(mf));
    matrix.features.push_back(std::move(tf));
  }

  int mtry = config.features_per_split;
  if (mtry <= 0) {
    mtry = static_cast<int>(std::sqrt(static_cast<double>(col_indices.size())));
    if (mtry < 1) mtry = 1;
  }
  mtry = std::min<int>(mtry, static_cast<int>(col_indices.size()));

  model.label_names = info.label_names;
  model.group = info.group;
  model.task = info.task;
  model.master_seed = config.master_seed;
  model.n_estimators = config.n_estimators;
  model.max_depth = config.max_depth;
  model.min_samples_split = config.min_samples_split;
  model.features_per_split = mtry;
  model.n_classes = static_cast<int>(n_classes);
  model.n_train_rows = n;
  {
    std::vector<std::string> names;
    for (const auto& f : model.features) names.push_back(f.name);
    model.schema_fingerprint = schema_fingerprint(features, names);
  }

  const int n_trees = config.n_estimators;
  model.trees.resize(static_cast<std::size_t>(n_trees));
  auto build_range = [&](int lo, int hi) {
    for (int t = lo; t < hi; ++t) {
      model.trees[static_cast<std::size_t>(t)] =
          build_one_tree(matrix, labels, n_classes, config, mtry, config.master_seed, t);
    }
  };

  const int workers = std::max(1, config.threads);
  if (workers == 1 || n_trees == 1) {
    build_range(0, n_trees);
  } else {
    // Trees are independent given per-tree seeds; any chunking yields the
    // same forest because results land by tree index.
    std::vector<std::thread> pool;
    const int chunk = (n_trees + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(n_trees, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(build_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

std::vector<std::int32_t> predict(const ForestModel& model, const DataTable& table) {
  const auto cols = bind_columns(model, table);
  const auto k = static_cast<std::size_t>(model.n_classes);
  std::vector<std::int32_t> preds(table.n_rows());
  std::vector<std::uint32_t> votes(k);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& tree : model.trees) {
      ++votes[static_cast<std::size_t>(tree_predict(tree, model, cols, r))];
    }
    preds[r] = majority(votes);
  }
  return preds;
}

double oob_accuracy(const ForestModel& model, const DataTable& features,
                    std::span<const std::int32_t> labels) {
  if (features.n_rows() != model.n_train_rows) {
    throw DataError("out-of-bag evaluation needs the original training table");
  }
  if (labels.size() != features.n_rows()) {
    throw DataError("label vector length does not match table rows");
  }
  const auto cols = bind_columns(model, features);
  const std::size_t n = features.n_rows();
  const auto k = static_cast<std::size_t>(model.n_classes);
  std::vector<std::uint32_t> votes(n * k, 0);
  std::vector<char> in_bag(n);

  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto r : bootstrap_indices(model.master_seed, static_cast<int>(t), n)) in_bag[r] = 1;
    for (std::size_t r = 0; r < n; ++r) {
      if (in_bag[r]) continue;
      const auto c = static_cast<std::size_t>(tree_predict(model.trees[t], model, cols, r));
      ++votes[r * k + c];
    }
  }

  std::size_t evaluated = 0, correct = 0;
  for (std::size_t r = 0; r < n; ++r) {
    std::span<const std::uint32_t> row_votes(votes.data() + r * k, k);
    std::uint64_t total = 0;
    for (auto v : row_votes) total += v;
    if (total == 0) continue;
    ++evaluated;
    if (majority(row_votes) == labels[r]) ++correct;
  }
  if (evaluated == 0) throw DataError("no out-of-bag rows to evaluate");
  return static_cast<double>(correct) / static_cast<double>(evaluated);
}

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path.string());

  out << "biasaudit-forest 1\n";
  out << "group " << percent_encode(model.group) << "\n";
  out << "task " << percent_encode(model.task) << "\n";
  out << "master_seed " << model.master_seed << "\n";
  out << "n_estimators " << model.n_estimators << "\n";
  out << "max_depth " << model.max_depth << "\n";
  out << "min_samples_split " << model.min_samples_split << "\n";
  out << "features_per_split " << model.features_per_split << "\n";
  out << "n_classes " << model.n_classes << "\n";
  out << "n_train_rows " << model.n_train_rows << "\n";
  out << "fingerprint " << model.schema_fingerprint << "\n";
  out << "labels " << model.label_names.size();
  for (const auto& l : model.label_names) out << " " << percent_encode(l);
  out << "\n";
  out << "features " << model.features.size() << "\n";
  for (std::size_t i = 0; i < model.features.size(); ++i) {
    const auto& f = model.features[i];
    if (f.kind == ColumnKind::numeric) {
      out << "feature " << i << " num " << percent_encode(f.name) << " "
          << format_double_exact(f.impute) << "\n";
    } else {
      out << "feature " << i << " " << (f.kind == ColumnKind::binary ? "bin" : "cat") << " "
          << percent_encode(f.name) << " " << f.dict.size();
      for (const auto& v : f.dict) out << " " << percent_encode(v);
      out << "\n";
    }
  }
  out << "trees " << model.trees.size() << "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tree = model.trees[t];
    out << "tree " << t << " " << tree.nodes.size() << "\n";
    for (const auto& node : tree.nodes) {
      switch (node.kind) {
        case TreeNode::numeric_split:
          out << "n num " << node.feature << " " << format_double_exact(node.threshold) << " "
              << node.left << " " << node.right << "\n";
          break;
        case TreeNode::categorical_split:
          out << "n cat " << node.feature << " " << node.category << " " << node.left << " "
              << node.right << "\n";
          break;
        case TreeNode::leaf:
          out << "n leaf " << node.predicted;
          for (auto c : node.counts) out << " " << c;
          out << "\n";
          break;
      }
    }
  }
  out << "end\n";
  if (!out) throw DataError("failed while writing model file: " + path.string());
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void bad_model(const std::filesystem::path& path, const std::string& why) {
  throw DataError("invalid model file " + path.string() + ": " + why);
}

}  // namespace

ForestModel load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());

  std::string line;
  auto next_line = [&]() -> std::vector<std::string> {
    if (!std::getline(in, line)) bad_model(path, "unexpected end of file");
    return split_ws(line);
  };
  auto expect_kv = [&](const std::string& key) -> std::string {
    auto toks = next_line();
    if (toks.size() < 2 || toks[0] != key) bad_model(path, "expected '" + key + "' line");
    return toks[1];
  };

  auto header = next_line();
  if (header.size() != 2 || header[0] != "biasaudit-forest") bad_model(path, "bad magic");
  if (header[1] != "1") bad_model(path, "unsupported version " + header[1]);

  ForestModel model;
  model.group = percent_decode(expect_kv("group"));
  model.task = percent_decode(expect_kv("task"));
  model.master_seed = std::stoull(expect_kv("master_seed"));
  model.n_estimators = std::stoi(expect_kv("n_estimators"));
  model.max_depth = std::stoi(expect_kv("max_depth"));
  model.min_samples_split = std::stoi(expect_kv("min_samples_split"));
  model.features_per_split = std::stoi(expect_kv("features_per_split"));
  model.n_classes = std::stoi(expect_kv("n_classes"));
  model.n_train_rows = std::stoull(expect_kv("n_train_rows"));
  model.schema_fingerprint = expect_kv("fingerprint");

  {
    auto toks = next_line();
    if (toks.size() < 2 || toks[0] != "labels") bad_model(path, "expected 'labels' line");
    const auto count = std::stoul(toks[1]);
    if (toks.size() != 2 + count) bad_model(path, "label count mismatch");
    for (std::size_t i = 0; i < count; ++i) model.label_names.push_back(percent_decode(toks[2 + i]));
  }

  const auto n_features = std::stoul(expect_kv("features"));
  for (std::size_t i = 0; i < n_features; ++i) {
    auto toks = next_line();
    if (toks.size() < 5 || toks[0] != "feature" || std::stoul(toks[1]) != i) {
      bad_model(path, "expected feature " + std::to_string(i));
    }
    ModelFeature f;
    f.name = percent_decode(toks[3]);
    if (toks[2] == "num") {
      f.kind = ColumnKind::numeric;
      f.impute = parse_double_exact(toks[4]);
    } else if (toks[2] == "cat" || toks[2] == "bin") {
      f.kind = toks[2] == "bin" ? ColumnKind::binary : ColumnKind::categorical;
      const auto dict_size = std::stoul(toks[4]);
      if (toks.size() != 5 + dict_size) bad_model(path, "dictionary size mismatch");
      for (std::size_t d = 0; d < dict_size; ++d) f.dict.push_back(percent_decode(toks[5 + d]));
    } else {
      bad_model(path, "unknown feature kind " + toks[2]);
    }
    model.features.push_back(std::move(f));
  }

  const auto n_trees = std::stoul(expect_kv("trees"));
  model.trees.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    auto toks = next_line();
    if (toks.size() != 3 || toks[0] != "tree" || std::stoul(toks[1]) != t) {
      bad_model(path, "expected tree " + std::to_string(t));
    }
    const auto n_nodes = std::stoul(toks[2]);
    Tree tree;
    tree.nodes.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      auto nt = next_line();
      if (nt.size() < 2 || nt[0] != "n") bad_model(path, "expected node record");
      TreeNode node;
      if (nt[1] == "num") {
        if (nt.size() != 6) bad_model(path, "bad numeric node");
        node.kind = TreeNode::numeric_split;
        node.feature = std::stoi(nt[2]);
        node.threshold = parse_double_exact(nt[3]);
        node.left = std::stoi(nt[4]);
        node.right = std::stoi(nt[5]);
      } else if (nt[1] == "cat") {
        if (nt.size() != 6) bad_model(path, "bad categorical node");
        node.kind = TreeNode::categorical_split;
        node.feature = std::stoi(nt[2]);
        node.category = std::stoi(nt[3]);
        node.left = std::stoi(nt[4]);
        node.right = std::stoi(nt[5]);
      } else if (nt[1] == "leaf") {
        if (nt.size() != 3 + static_cast<std::size_t>(model.n_classes)) {
          bad_model(path, "bad leaf node");
        }
        node.kind = TreeNode::leaf;
        node.predicted = std::stoi(nt[2]);
        for (int c = 0; c < model.n_classes; ++c) {
          node.counts.push_back(static_cast<std::uint32_t>(std::stoul(nt[3 + c])));
        }
      } else {
        bad_model(path, "unknown node kind " + nt[1]);
      }
      if (node.kind != TreeNode::leaf) {
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= model.features.size() ||
            node.left < 0 || node.right < 0 ||
            static_cast<std::size_t>(node.left) >= n_nodes ||
            static_cast<std::size_t>(node.right) >= n_nodes) {
          bad_model(path, "node reference out of range");
        }
      }
      tree.nodes.push_back(std::move(node));
    }
    model.trees.push_back(std::move(tree));
  }

  auto tail = next_line();
  if (tail.size() != 1 || tail[0] != "end") bad_model(path, "missing end marker");
  return model;
}

}  // namespace biasaudit
