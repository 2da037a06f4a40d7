#include "tfk/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "tfk/error.hpp"

namespace tfk {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json store_to_json(const ParameterStore& store) {
  json arr = json::array();
  for (const auto& p : store.arrays()) {
    arr.push_back({{"name", p.name}, {"shape", p.shape}, {"values", p.values}});
  }
  return arr;
}

void store_from_json(const json& j, ParameterStore& store, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != store.size()) fail(what + ": parameter array count mismatch");
  for (int i = 0; i < store.size(); ++i) {
    ParameterArray& p = store[i];
    const json& e = j[i];
    if (e.at("name").get<std::string>() != p.name) fail(what + ": expected parameter '" + p.name + "'");
    if (e.at("shape").get<std::vector<int>>() != p.shape) fail(what + ": shape mismatch for '" + p.name + "'");
    auto values = e.at("values").get<std::vector<double>>();
    if (values.size() != p.values.size()) fail(what + ": size mismatch for '" + p.name + "'");
    p.values = std::move(values);
  }
}

json metrics_to_json(const MetricsReport& m) {
  return {{"magnitude_mae", number(m.magnitude_mae)},
          {"angle_mean", number(m.angle_mean)},
          {"tensor_mae", number(m.tensor_mae)},
          {"pearson_magnitude", number(m.pearson_magnitude)},
          {"relative_tensor_error", number(m.relative_tensor_error)},
          {"n_atoms", m.n_atoms},
          {"n_angle_pairs", m.n_angle_pairs},
          {"n_angle_skipped", m.n_angle_skipped}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport m;
  m.magnitude_mae = read_number(j.at("magnitude_mae"));
  m.angle_mean = read_number(j.at("angle_mean"));
  m.tensor_mae = read_number(j.at("tensor_mae"));
  m.pearson_magnitude = read_number(j.at("pearson_magnitude"));
  m.relative_tensor_error = read_number(j.at("relative_tensor_error"));
  m.n_atoms = j.at("n_atoms").get<int>();
  m.n_angle_pairs = j.at("n_angle_pairs").get<int>();
  m.n_angle_skipped = j.at("n_angle_skipped").get<int>();
  return m;
}

json config_to_json(const ModelConfig& c) {
  return {{"max_order", c.max_order},
          {"conv_widths", c.conv_widths},
          {"filters", c.filters},
          {"neighbors", c.neighbors},
          {"radial_size", c.radial.size},
          {"radial_cutoff", c.radial.cutoff},
          {"norm_epsilon", c.norm_epsilon},
          {"output_scale", c.output_scale},
          {"inject_order1_bias", c.inject_order1_bias}};
}

ModelConfig config_from_json(const json& j, const json& vocabulary, const json& seed) {
  ModelConfig c;
  c.max_order = j.at("max_order").get<int>();
  c.conv_widths = j.at("conv_widths").get<std::array<int, 3>>();
  c.filters = j.at("filters").get<std::array<int, 3>>();
  c.neighbors = j.at("neighbors").get<int>();
  c.radial.size = j.at("radial_size").get<int>();
  c.radial.cutoff = j.at("radial_cutoff").get<double>();
  c.norm_epsilon = j.at("norm_epsilon").get<double>();
  c.output_scale = j.at("output_scale").get<double>();
  c.inject_order1_bias = j.at("inject_order1_bias").get<bool>();
  c.vocabulary = vocabulary.get<std::vector<std::string>>();
  c.seed = seed.get<std::uint64_t>();
  return c;
}

}  // namespace

std::string checkpoint_to_json(const Model& model, const TrainConfig* train_config, const TrainState* state) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = config_to_json(model.config());
  j["vocabulary"] = model.config().vocabulary;
  j["seed"] = model.config().seed;
  j["parameter_count"] = model.parameters().total_size();
  j["parameters"] = store_to_json(model.parameters());
  if (train_config) {
    j["train_config"] = {{"learning_rate", train_config->learning_rate},
                         {"huber_delta", train_config->huber_delta},
                         {"total_batches", train_config->total_batches},
                         {"seed", train_config->seed},
                         {"optimizer", optimizer_name(train_config->optimizer)},
                         {"validation_interval", train_config->validation_interval}};
  }
  if (state) {
    json s;
    s["completed_batches"] = state->completed_batches;
    s["best_parameters"] = store_to_json(state->best_parameters);
    s["best_batch"] = state->history.best_batch;
    s["best_validation_loss"] = number(state->history.best_validation_loss);
    json losses = json::array();
    for (double v : state->history.train_loss) losses.push_back(number(v));
    s["train_loss"] = losses;
    json val = json::array();
    for (const auto& r : state->history.validation) {
      val.push_back({{"batch", r.batch}, {"loss", number(r.loss)}, {"metrics", metrics_to_json(r.metrics)}});
    }
    s["validation"] = val;
    if (state->optimizer) {
      const Optimizer& o = *state->optimizer;
      json oj = {{"kind", optimizer_name(o.kind())}, {"learning_rate", o.learning_rate()}, {"steps", o.steps()}};
      if (o.kind() == OptimizerKind::kAdam) {
        oj["first_moment"] = store_to_json(o.first_moment());
        oj["second_moment"] = store_to_json(o.second_moment());
      }
      s["optimizer"] = oj;
    }
    j["state"] = s;
  }
  return j.dump(1) + "\n";
}

LoadedCheckpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kCheckpointFormat) fail("not a checkpoint file");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) fail("unsupported checkpoint version " + std::to_string(version));

    LoadedCheckpoint out;
    out.model.emplace(config_from_json(j.at("config"), j.at("vocabulary"), j.at("seed")));
    store_from_json(j.at("parameters"), out.model->parameters(), "checkpoint");

    if (j.contains("train_config")) {
      const json& t = j["train_config"];
      TrainConfig tc;
      tc.learning_rate = t.at("learning_rate").get<double>();
      tc.huber_delta = t.at("huber_delta").get<double>();
      tc.total_batches = t.at("total_batches").get<int>();
      tc.seed = t.at("seed").get<std::uint64_t>();
      tc.optimizer = parse_optimizer(t.at("optimizer").get<std::string>());
      tc.validation_interval = t.at("validation_interval").get<int>();
      out.train_config = tc;
    }
    if (j.contains("state")) {
      const json& s = j["state"];
      TrainState st;
      st.parameters = out.model->parameters();
      st.best_parameters = out.model->parameters();
      store_from_json(s.at("best_parameters"), st.best_parameters, "checkpoint best parameters");
      st.completed_batches = s.at("completed_batches").get<int>();
      st.history.best_batch = s.at("best_batch").get<int>();
      st.history.best_validation_loss = read_number(s.at("best_validation_loss"));
      if (std::isnan(st.history.best_validation_loss)) {
        st.history.best_validation_loss = std::numeric_limits<double>::infinity();
      }
      for (const auto& v : s.at("train_loss")) st.history.train_loss.push_back(read_number(v));
      for (const auto& r : s.at("validation")) {
        st.history.validation.push_back(
            {r.at("batch").get<int>(), read_number(r.at("loss")), metrics_from_json(r.at("metrics"))});
      }
      if (s.contains("optimizer")) {
        const json& oj = s["optimizer"];
        Optimizer o(parse_optimizer(oj.at("kind").get<std::string>()), oj.at("learning_rate").get<double>(),
                    out.model->parameters());
        o.set_steps(oj.at("steps").get<long>());
        if (o.kind() == OptimizerKind::kAdam) {
          store_from_json(oj.at("first_moment"), o.first_moment(), "optimizer state");
          store_from_json(oj.at("second_moment"), o.second_moment(), "optimizer state");
        }
        st.optimizer = std::move(o);
      }
      out.state = std::move(st);
    }
    return out;
  } catch (const json::exception& e) {
    fail(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig* train_config,
                     const TrainState* state) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("cannot write checkpoint '" + path.string() + "'");
  f << checkpoint_to_json(model, train_config, state);
  if (!f) fail("failed writing checkpoint '" + path.string() + "'");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("cannot read checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace tfk
