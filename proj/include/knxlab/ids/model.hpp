#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "knxlab/ids/dataset.hpp"
#include "knxlab/ids/features.hpp"
#include "knxlab/ids/svm.hpp"
#include "knxlab/ids/tree.hpp"

namespace knxlab::ids {

enum class Algo { Tree, Svm };

inline const char* algo_name(Algo a) { return a == Algo::Tree ? "tree" : "svm"; }

struct Hyperparams {
  TreeParams tree;
  SvmParams svm;
};

// Trained detector plus everything needed to score fresh captures: the
// feature kind, the detection window, and (for JSD features) the frozen
// histogram spec and baseline segment distributions.
struct Model {
  int version = 1;
  Algo algo = Algo::Svm;
  FeatureKind feature = FeatureKind::Jsd;
  double window_s = 0.0;
  HistogramSpec spec;
  std::vector<Distribution> baseline;
  DecisionTree tree;
  LinearSvm svm;

  int predict(std::span<const double> values) const {
    return algo == Algo::Tree ? tree.predict(values) : svm.predict(values);
  }

  double score(std::span<const double> values) const {
    return algo == Algo::Tree ? tree.score(values) : svm.margin(values);
  }
};

// 0/1 encoding used by both learners: attack = 1.
inline int label_to_class(Label l) { return l == Label::Attack ? 1 : 0; }

inline Model train(const Dataset& dataset, Algo algo, const Hyperparams& hyper = {}) {
  if (dataset.train_idx.empty()) throw Error("empty training split");
  std::vector<std::vector<double>> x;
  std::vector<int> y01, ypm;
  x.reserve(dataset.train_idx.size());
  for (auto i : dataset.train_idx) {
    x.push_back(dataset.vectors[i].values);
    const int c = label_to_class(dataset.vectors[i].label);
    y01.push_back(c);
    ypm.push_back(c ? 1 : -1);
  }
  bool has0 = false, has1 = false;
  for (int c : y01) (c ? has1 : has0) = true;
  if (!has0 || !has1) throw SingleClassTraining();

  Model model;
  model.algo = algo;
  if (algo == Algo::Tree)
    model.tree = DecisionTree::fit(x, y01, hyper.tree);
  else
    model.svm = LinearSvm::fit(x, ypm, hyper.svm);
  return model;
}

// Detection rate: correct classifications over the test split.
inline double evaluate(const Model& model, const Dataset& dataset) {
  if (dataset.test_idx.empty()) throw Error("empty test split");
  std::size_t correct = 0;
  for (auto i : dataset.test_idx) {
    const auto& v = dataset.vectors[i];
    if (model.predict(v.values) == label_to_class(v.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.test_idx.size());
}

struct Verdict {
  double window_start = 0.0;
  Label label = Label::Unlabeled;
  double score = 0.0;
};

// Scores every complete window of a capture with a trained model.
inline std::vector<Verdict> detect(const Model& model,
                                   const sim::CaptureSeries& capture) {
  const auto segments = segment_series(capture, model.window_s);
  std::vector<Verdict> verdicts;
  verdicts.reserve(segments.size());
  for (const auto& seg : segments) {
    FeatureVector f;
    if (model.feature == FeatureKind::Jsd)
      f = jsd_feature_vector(seg, model.spec, model.baseline);
    else
      f = moment_features(seg, model.feature);
    Verdict v;
    v.window_start = seg.start_time;
    v.label = model.predict(f.values) ? Label::Attack : Label::NoAttack;
    v.score = model.score(f.values);
    verdicts.push_back(v);
  }
  return verdicts;
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json to_json(const Model& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["algo"] = algo_name(m.algo);
  j["feature"] = feature_name(m.feature);
  j["window_s"] = m.window_s;
  j["histogram_edges"] = m.spec.edges;
  nlohmann::json baseline = nlohmann::json::array();
  for (const auto& d : m.baseline) baseline.push_back(d.probs);
  j["baseline"] = std::move(baseline);
  if (m.algo == Algo::Tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : m.tree.nodes())
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"label", n.label},
                       {"class1_fraction", n.class1_fraction}});
    j["tree"] = {{"max_depth", m.tree.params().max_depth},
                 {"min_leaf", m.tree.params().min_leaf},
                 {"nodes", std::move(nodes)}};
  } else {
    j["svm"] = {{"weights", m.svm.weights()},
                {"bias", m.svm.bias()},
                {"mean", m.svm.means()},
                {"sd", m.svm.sds()},
                {"lambda", m.svm.params().lambda},
                {"epochs", m.svm.params().epochs},
                {"seed", m.svm.params().seed}};
  }
  return j;
}

inline FeatureKind feature_from_name(const std::string& name) {
  if (name == "mean") return FeatureKind::Mean;
  if (name == "variance") return FeatureKind::Variance;
  if (name == "mean_variance") return FeatureKind::MeanVar;
  if (name == "jsd") return FeatureKind::Jsd;
  throw Error("unknown feature kind: " + name);
}

inline Algo algo_from_name(const std::string& name) {
  if (name == "tree") return Algo::Tree;
  if (name == "svm") return Algo::Svm;
  throw Error("unknown algorithm: " + name);
}

inline Model model_from_json(const nlohmann::json& j) {
  Model m;
  m.version = j.at("version").get<int>();
  if (m.version != 1) throw Error("unsupported model version");
  m.algo = algo_from_name(j.at("algo").get<std::string>());
  m.feature = feature_from_name(j.at("feature").get<std::string>());
  m.window_s = j.at("window_s").get<double>();
  m.spec.edges = j.at("histogram_edges").get<std::vector<double>>();
  for (const auto& probs : j.at("baseline"))
    m.baseline.push_back(Distribution{probs.get<std::vector<double>>()});
  if (m.algo == Algo::Tree) {
    const auto& t = j.at("tree");
    m.tree.params().max_depth = t.at("max_depth").get<int>();
    m.tree.params().min_leaf = t.at("min_leaf").get<int>();
    for (const auto& jn : t.at("nodes")) {
      DecisionTree::Node n;
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      n.label = jn.at("label").get<int>();
      n.class1_fraction = jn.at("class1_fraction").get<double>();
      m.tree.nodes().push_back(n);
    }
  } else {
    const auto& s = j.at("svm");
    m.svm.weights() = s.at("weights").get<std::vector<double>>();
    m.svm.bias() = s.at("bias").get<double>();
    m.svm.means() = s.at("mean").get<std::vector<double>>();
    m.svm.sds() = s.at("sd").get<std::vector<double>>();
    m.svm.params().lambda = s.at("lambda").get<double>();
    m.svm.params().epochs = s.at("epochs").get<int>();
    m.svm.params().seed = s.at("seed").get<std::uint64_t>();
  }
  return m;
}

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open model file for writing: " + path);
  out << to_json(m).dump(2) << "\n";
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace knxlab::ids
