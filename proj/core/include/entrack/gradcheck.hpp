#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "entrack/autodiff.hpp"

namespace entrack {

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor for the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-3;
  // Entries probed per parameter tensor; 0 probes every entry.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 0;  // selects the probed entries when sampling
};

struct ParamCheck {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;

  bool passed(double tolerance) const { return max_rel_error <= tolerance; }
};

double relative_error(double analytic, double numeric, double floor);

// Central differences of `loss` around the current values of `store`,
// compared against `analytic`. Frozen parameters are skipped. The store is
// restored before returning.
GradCheckReport check_gradients(ParameterStore& store, const Gradients& analytic,
                                const std::function<double(const ParameterStore&)>& loss,
                                const GradCheckOptions& options = {});

}  // namespace entrack
