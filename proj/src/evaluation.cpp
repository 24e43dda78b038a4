#include "smart_hands/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "smart_hands/errors.hpp"

namespace smart_hands::eval {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)),
      counts_(labels_.size(), std::vector<std::uint64_t>(labels_.size(), 0)) {
  if (labels_.empty()) {
    throw EmptyMatrix("confusion matrix needs at least one label");
  }
}

ConfusionMatrix ConfusionMatrix::from_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    labels = split_csv_row(line);
    break;
  }
  if (labels.empty()) throw ParseError(lineno, "missing CSV header row");

  ConfusionMatrix m(labels);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (row >= labels.size()) {
      throw ParseError(lineno, "more rows than labels");
    }
    const auto cells = split_csv_row(line);
    if (cells.size() != labels.size()) {
      throw ParseError(lineno, "expected " + std::to_string(labels.size()) +
                                   " cells, got " + std::to_string(cells.size()));
    }
    for (std::size_t col = 0; col < cells.size(); ++col) {
      try {
        // Empty cells read as zero, for sparse fixture tables.
        m.counts_[row][col] =
            cells[col].empty() ? 0 : std::stoull(cells[col]);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad count '" + cells[col] + "'");
      }
    }
    ++row;
  }
  if (row != labels.size()) {
    throw ParseError(lineno, "expected " + std::to_string(labels.size()) +
                                 " count rows, got " + std::to_string(row));
  }
  return m;
}

void ConfusionMatrix::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out << labels_[i] << (i + 1 < labels_.size() ? "," : "\n");
  }
  for (const auto& row : counts_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
  }
}

std::uint64_t ConfusionMatrix::at(std::size_t true_idx,
                                  std::size_t pred_idx) const {
  return counts_.at(true_idx).at(pred_idx);
}

std::optional<std::size_t> ConfusionMatrix::index_of(
    std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

void ConfusionMatrix::add(std::size_t true_idx, std::size_t pred_idx,
                          std::uint64_t n) {
  counts_.at(true_idx).at(pred_idx) += n;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : counts_) {
    sum = std::accumulate(row.begin(), row.end(), sum);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) sum += counts_[i][i];
  return sum;
}

double ConfusionMatrix::accuracy() const {
  const std::uint64_t n = total();
  if (n == 0) throw EmptyMatrix("accuracy of an all-zero matrix");
  return static_cast<double>(trace()) / static_cast<double>(n);
}

std::vector<ConfusionMatrix::ClassMetrics>
ConfusionMatrix::per_class_metrics() const {
  if (total() == 0) throw EmptyMatrix("metrics of an all-zero matrix");
  std::vector<ClassMetrics> out(labels_.size());
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    std::uint64_t col_sum = 0, row_sum = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      col_sum += counts_[i][c];
      row_sum += counts_[c][i];
    }
    if (col_sum > 0) {
      out[c].precision =
          static_cast<double>(counts_[c][c]) / static_cast<double>(col_sum);
    }
    if (row_sum > 0) {
      out[c].recall =
          static_cast<double>(counts_[c][c]) / static_cast<double>(row_sum);
    }
  }
  return out;
}

double iou(const perception::BoundingBox& a, const perception::BoundingBox& b) {
  const double ix = std::max(
      0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(
      0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double average_precision(std::span<const DetectionSample> samples,
                         double iou_threshold) {
  std::size_t total_gt = 0;
  for (const auto& s : samples) total_gt += s.ground_truth.size();
  if (total_gt == 0) {
    throw NoGroundTruth("average precision needs at least one ground-truth box");
  }

  struct Flat {
    std::size_t sample;
    std::size_t index;
    double confidence;
  };
  std::vector<Flat> order;
  for (std::size_t si = 0; si < samples.size(); ++si) {
    for (std::size_t pi = 0; pi < samples[si].predictions.size(); ++pi) {
      order.push_back({si, pi, samples[si].predictions[pi].confidence});
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Flat& a, const Flat& b) {
                     return a.confidence > b.confidence;
                   });

  std::vector<std::vector<bool>> gt_used(samples.size());
  for (std::size_t si = 0; si < samples.size(); ++si) {
    gt_used[si].assign(samples[si].ground_truth.size(), false);
  }

  std::vector<double> precision(order.size()), recall(order.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& [si, pi, conf] = order[k];
    const auto& pred = samples[si].predictions[pi];

    double best_iou = 0.0;
    std::size_t best_gt = samples[si].ground_truth.size();
    for (std::size_t gi = 0; gi < samples[si].ground_truth.size(); ++gi) {
      if (gt_used[si][gi]) continue;
      const double v = iou(pred, samples[si].ground_truth[gi]);
      if (v >= iou_threshold && v > best_iou) {
        best_iou = v;
        best_gt = gi;
      }
    }
    if (best_gt < samples[si].ground_truth.size()) {
      gt_used[si][best_gt] = true;
      ++tp;
    }
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }

  // Monotone envelope, then the all-points sum in ascending order.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double map50(std::span<const DetectionSample> samples) {
  return average_precision(samples, 0.5);
}

double compose_throughput(const StageProfile& profile, ComposeMode mode) {
  if (profile.stages.empty()) {
    throw std::invalid_argument("compose_throughput: empty profile");
  }
  for (const auto& stage : profile.stages) {
    if (!(stage.rate_fps > 0)) {
      throw std::invalid_argument("compose_throughput: rate must be positive");
    }
  }
  if (mode == ComposeMode::Pipelined) {
    double slowest = profile.stages.front().rate_fps;
    for (const auto& stage : profile.stages) {
      slowest = std::min(slowest, stage.rate_fps);
    }
    return slowest;
  }
  double period = 0.0;
  for (const auto& stage : profile.stages) period += 1.0 / stage.rate_fps;
  return 1.0 / period;
}

FleetImpact fleet_impact(std::int64_t equipped_vehicles,
                         std::int64_t fleet_vehicles, double fraction,
                         std::int64_t accidents) {
  if (fleet_vehicles <= 0) {
    throw std::invalid_argument("fleet_impact: fleet must be positive");
  }
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fleet_impact: fraction must be in [0,1]");
  }
  FleetImpact out;
  out.penetration = static_cast<double>(equipped_vehicles) /
                    static_cast<double>(fleet_vehicles);
  out.prevented_accidents =
      std::llround(static_cast<double>(accidents) * fraction);
  return out;
}

DatasetSplit split_dataset(std::span<const SequenceInfo> sequences,
                           const std::array<double, 3>& ratios) {
  if (sequences.size() < 3) {
    throw InsufficientData("split needs at least 3 sequences, got " +
                           std::to_string(sequences.size()));
  }
  const double ratio_sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(ratio_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_dataset: ratios must sum to 1");
  }

  const std::size_t n = sequences.size();
  std::vector<double> cum(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += static_cast<double>(sequences[i].frames);
    cum[i] = total;
  }

  // Cut after the prefix whose frame share is closest to the target.
  auto closest_cut = [&](double target, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    double best_err = std::abs(cum[lo - 1] - target);
    for (std::size_t k = lo + 1; k <= hi; ++k) {
      const double err = std::abs(cum[k - 1] - target);
      if (err < best_err) {
        best_err = err;
        best = k;
      }
    }
    return best;
  };
  const std::size_t cut1 = closest_cut(ratios[0] * total, 1, n - 2);
  const std::size_t cut2 =
      closest_cut((ratios[0] + ratios[1]) * total, cut1 + 1, n - 1);

  DatasetSplit split;
  for (std::size_t i = 0; i < cut1; ++i) split.train.push_back(i);
  for (std::size_t i = cut1; i < cut2; ++i) split.val.push_back(i);
  for (std::size_t i = cut2; i < n; ++i) split.test.push_back(i);
  return split;
}

}  // namespace smart_hands::eval
