#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/image.hpp"

namespace facade {

// K x K pixel counts, row = ground-truth class, column = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes) : k_(classes) {
    if (classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(classes) * classes, 0);
  }

  int classes() const { return k_; }
  std::uint64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt) * k_ + pred]; }
  std::uint64_t& at(int gt, int pred) { return counts_[static_cast<std::size_t>(gt) * k_ + pred]; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  std::uint64_t row_sum(int k) const {
    std::uint64_t s = 0;
    for (int j = 0; j < k_; ++j) s += at(k, j);
    return s;
  }
  std::uint64_t col_sum(int k) const {
    std::uint64_t s = 0;
    for (int i = 0; i < k_; ++i) s += at(i, k);
    return s;
  }

  void accumulate(const LabelMask& gt, const LabelMask& pred) {
    if (!gt.same_shape(pred))
      throw std::invalid_argument("accumulate: ground truth " + std::to_string(gt.width()) + "x" +
                                  std::to_string(gt.height()) + " vs prediction " +
                                  std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
    auto g = gt.data();
    auto p = pred.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] >= k_ || p[i] >= k_)
        throw std::out_of_range("accumulate: class index outside confusion matrix range");
    }
    for (std::size_t i = 0; i < g.size(); ++i) ++at(g[i], p[i]);
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    if (o.k_ != k_) throw std::invalid_argument("cannot merge confusion matrices of different size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int k_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix accumulate(ConfusionMatrix cm, const LabelMask& gt, const LabelMask& pred) {
  cm.accumulate(gt, pred);
  return cm;
}

// trace / total.
inline double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw std::domain_error("accuracy: empty matrix");
  std::uint64_t diag = 0;
  for (int k = 0; k < cm.classes(); ++k) diag += cm.at(k, k);
  return static_cast<double>(diag) / static_cast<double>(total);
}

struct ClassScores {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> iou;
  std::uint64_t support = 0;  // ground-truth pixels
};

// One-vs-rest scores for class k. F1 is 2TP / (2TP + FP + FN), the harmonic
// mean of precision and recall, defined whenever the class occurs at all.
inline ClassScores class_scores(const ConfusionMatrix& cm, int k) {
  const double tp = static_cast<double>(cm.at(k, k));
  const double fp = static_cast<double>(cm.col_sum(k)) - tp;
  const double fn = static_cast<double>(cm.row_sum(k)) - tp;
  ClassScores s;
  s.support = cm.row_sum(k);
  if (tp + fp > 0) s.precision = tp / (tp + fp);
  if (tp + fn > 0) s.recall = tp / (tp + fn);
  if (tp + fp + fn > 0) {
    s.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    s.iou = tp / (tp + fp + fn);
  }
  return s;
}

struct PrecisionRecallF1 {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

inline PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm, int k) {
  const auto s = class_scores(cm, k);
  return {s.precision, s.recall, s.f1};
}

// Mean of diag / column sum over classes that were predicted at least once.
inline double class_average(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int n = 0;
  for (int k = 0; k < cm.classes(); ++k) {
    const auto col = cm.col_sum(k);
    if (col == 0) continue;
    sum += static_cast<double>(cm.at(k, k)) / static_cast<double>(col);
    ++n;
  }
  if (n == 0) throw std::domain_error("class_average: empty matrix");
  return sum / n;
}

// Mean IoU over classes present in ground truth or prediction.
inline double miou(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int n = 0;
  for (int k = 0; k < cm.classes(); ++k)
    if (auto iou = class_scores(cm, k).iou) {
      sum += *iou;
      ++n;
    }
  if (n == 0) throw std::domain_error("miou: empty matrix");
  return sum / n;
}

inline double f1_macro(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int n = 0;
  for (int k = 0; k < cm.classes(); ++k)
    if (auto f1 = class_scores(cm, k).f1) {
      sum += *f1;
      ++n;
    }
  if (n == 0) throw std::domain_error("f1_macro: empty matrix");
  return sum / n;
}

struct MetricsReport {
  double acc = 0.0;
  double class_avg = 0.0;
  double f1_macro = 0.0;
  double miou = 0.0;
  std::vector<ClassScores> per_class;
  std::vector<int> class_avg_classes;  // classes entering Class_avg
  std::vector<int> evaluated_classes;  // classes entering F1 and mIoU
};

inline MetricsReport evaluate(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.acc = accuracy(cm);
  r.class_avg = class_average(cm);
  r.f1_macro = f1_macro(cm);
  r.miou = miou(cm);
  for (int k = 0; k < cm.classes(); ++k) {
    r.per_class.push_back(class_scores(cm, k));
    if (cm.col_sum(k) > 0) r.class_avg_classes.push_back(k);
    if (r.per_class.back().iou) r.evaluated_classes.push_back(k);
  }
  return r;
}

inline nlohmann::ordered_json to_json(const MetricsReport& r,
                                      const std::vector<std::string>& class_names = {}) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["acc"] = r.acc;
  j["class_avg"] = r.class_avg;
  j["f1_macro"] = r.f1_macro;
  j["miou"] = r.miou;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& s = r.per_class[k];
    nlohmann::ordered_json row;
    row["index"] = k;
    row["name"] = k < class_names.size() ? class_names[k] : std::to_string(k);
    row["precision"] = opt(s.precision);
    row["recall"] = opt(s.recall);
    row["f1"] = opt(s.f1);
    row["iou"] = opt(s.iou);
    row["support"] = s.support;
    per.push_back(row);
  }
  j["per_class"] = per;
  j["class_avg_classes"] = r.class_avg_classes;
  j["evaluated_classes"] = r.evaluated_classes;
  return j;
}

// IoU of one class between two masks; nullopt if the class is absent from both.
inline std::optional<double> class_iou(const LabelMask& gt, const LabelMask& pred, int k) {
  if (!gt.same_shape(pred)) throw std::invalid_argument("class_iou: shape mismatch");
  std::uint64_t inter = 0, uni = 0;
  auto g = gt.data();
  auto p = pred.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool a = g[i] == k, b = p[i] == k;
    inter += a && b;
    uni += a || b;
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace facade
