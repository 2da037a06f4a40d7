#include "tfk/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tfk/error.hpp"
#include "tfk/loss.hpp"
#include "tfk/random.hpp"
#include "tfk/training.hpp"

namespace tfk {

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradientCheckReport check_gradients(Model& model, const AtomSystem& system, const GradientCheckSettings& settings) {
  if (!system.targets) fail("gradient check needs a system with targets");
  const LossAndGradient lg = loss_and_gradient(model, system, settings.huber_delta);

  std::map<std::string, std::string> kind_of_layer;
  for (const auto& layer : model.layers()) kind_of_layer[layer->name()] = std::string(layer_kind_name(layer->kind()));

  // (array id, element) candidates grouped by layer kind, in declaration order.
  std::map<std::string, std::vector<std::pair<int, int>>> pool;
  std::vector<std::string> kind_order;
  ParameterStore& params = model.parameters();
  for (int id = 0; id < params.size(); ++id) {
    const std::string& name = params[id].name;
    const auto it = kind_of_layer.find(name.substr(0, name.find('.')));
    if (it == kind_of_layer.end()) fail("parameter '" + name + "' belongs to no layer");
    if (!pool.count(it->second)) kind_order.push_back(it->second);
    auto& list = pool[it->second];
    for (int e = 0; e < static_cast<int>(params[id].values.size()); ++e) list.emplace_back(id, e);
  }

  GradientCheckReport report;
  for (std::size_t ki = 0; ki < kind_order.size(); ++ki) {
    auto list = pool[kind_order[ki]];
    Rng rng = substream(settings.seed, "gradcheck", ki);
    std::shuffle(list.begin(), list.end(), rng);
    if (static_cast<int>(list.size()) > settings.samples_per_kind) list.resize(settings.samples_per_kind);

    GradientCheckReport::KindResult res;
    res.kind = kind_order[ki];
    res.sampled = static_cast<int>(list.size());
    for (const auto& [id, e] : list) {
      double& w = params[id].values[e];
      const double saved = w;
      w = saved + settings.step;
      const double up = batch_loss(model.forward(system), system, settings.huber_delta).loss;
      w = saved - settings.step;
      const double down = batch_loss(model.forward(system), system, settings.huber_delta).loss;
      w = saved;
      const double numeric = (up - down) / (2.0 * settings.step);
      const double err = gradient_relative_error(lg.gradient[id].values[e], numeric, settings.floor);
      if (err > res.max_relative_error || res.worst_parameter.empty()) {
        if (err >= res.max_relative_error) {
          res.max_relative_error = err;
          res.worst_parameter = params[id].name + "[" + std::to_string(e) + "]";
        }
      }
    }
    report.max_relative_error = std::max(report.max_relative_error, res.max_relative_error);
    report.kinds.push_back(res);
  }
  return report;
}

}  // namespace tfk
