#include "entrack/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "entrack/random.hpp"

namespace entrack {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(ParameterStore& store, const Gradients& analytic,
                                const std::function<double(const ParameterStore&)>& loss,
                                const GradCheckOptions& options) {
  if (analytic.size() != store.size()) throw ShapeError("gradient table does not match store");
  GradCheckReport report;
  Rng rng(options.seed);
  for (ParamId id = 0; id < store.size(); ++id) {
    if (!store.trainable(id)) continue;
    Tensor& tensor = store.tensor(id);
    ParamCheck check;
    check.name = store.name(id);

    std::vector<std::size_t> entries(tensor.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries_per_param > 0 && entries.size() > options.max_entries_per_param) {
      rng.shuffle(entries);
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }

    for (std::size_t k : entries) {
      const double saved = tensor.values[k];
      tensor.values[k] = saved + options.step;
      const double plus = loss(store);
      tensor.values[k] = saved - options.step;
      const double minus = loss(store);
      tensor.values[k] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[id].values[k];
      const double err = relative_error(a, numeric, options.floor);
      ++check.checked;
      if (err > check.max_rel_error || check.checked == 1) {
        check.max_rel_error = std::max(check.max_rel_error, err);
        if (err >= check.max_rel_error) {
          check.worst_index = k;
          check.analytic = a;
          check.numeric = numeric;
        }
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace entrack
