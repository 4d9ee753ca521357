#pragma once

// Distances between deployed logits and aligned reference logits.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logitaudit/core_model.h"

namespace logitaudit {

enum class DistanceKind : std::uint8_t { kTV, kKL, kTopK };

std::string_view to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(std::string_view s);

struct DistanceSample {
  std::uint32_t step_index = 0;
  DistanceKind kind = DistanceKind::kTV;
  double value = 0.0;
  // Set for steps with no reference counterpart (overreported dummy steps).
  bool flagged = false;

  bool operator==(const DistanceSample&) const = default;
};

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

// 1/2 * sum |softmax(l) - softmax(l_star)|, in [0, 1].
double tv_distance(std::span<const double> l, std::span<const double> l_star);

// KL(softmax(l) || softmax(l_star)) >= 0.
double kl_divergence(std::span<const double> l, std::span<const double> l_star);

// Minimal L1 perturbation of l_star that makes `indices` its top-k set.
// Sorts once, then sweeps the n candidate thresholds with running sums.
double topk_distance(std::span<const double> l_star,
                     std::span<const std::uint32_t> indices, std::size_t k);

// Brute-force check of topk_distance for n <= 20: dense threshold grid over
// [min - 1, max + 1] plus every exact logit value, greedy cost per threshold.
double topk_distance_oracle(std::span<const double> l_star,
                            std::span<const std::uint32_t> indices,
                            std::size_t k, double grid_step = 1e-4);

// Value reported for a step that has no reference computation.
double sentinel_distance(DistanceKind kind, const StepTrace& step);

// Distance of one step against its aligned reference; a missing reference
// yields the sentinel value with the sample flagged. Throws Error(kModeError)
// when the step's logging mode cannot support `kind`.
DistanceSample measure_step(const StepTrace& step,
                            const std::optional<Logits>& reference,
                            DistanceKind kind);

// One sample per step, in order. `reference[i]` is empty for dummy steps.
std::vector<DistanceSample> measure_trace(
    std::span<const StepTrace> trace,
    std::span<const std::optional<Logits>> reference, DistanceKind kind);
std::vector<DistanceSample> measure_trace(std::span<const StepTrace> trace,
                                          std::span<const Logits> reference,
                                          DistanceKind kind);

// CSV with header "step_index,kind,value,flagged".
void write_samples_csv(std::ostream& out, std::span<const DistanceSample> samples);
std::vector<DistanceSample> read_samples_csv(std::istream& in);

}  // namespace logitaudit
