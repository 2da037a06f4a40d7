#include "tfk/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "tfk/checkpoint.hpp"
#include "tfk/dataset.hpp"
#include "tfk/error.hpp"
#include "tfk/generators.hpp"
#include "tfk/pdb_io.hpp"
#include "tfk/refinement.hpp"
#include "tfk/training.hpp"
#include "tfk/vector_io.hpp"
#include "tfk/verification.hpp"

namespace tfk {

namespace fs = std::filesystem;

namespace {

class Outputs {
 public:
  explicit Outputs(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  const fs::path& root() const { return root_; }
  fs::path path(const std::string& relative) {
    files_.push_back(relative);
    const fs::path p = root_ / relative;
    fs::create_directories(p.parent_path());
    return p;
  }
  void add(const std::string& relative) { files_.push_back(relative); }
  void write(const std::string& relative, const std::string& content) {
    std::ofstream f(path(relative), std::ios::binary);
    if (!f) fail("cannot write '" + (root_ / relative).string() + "'");
    f << content;
  }
  void finish() {
    std::sort(files_.begin(), files_.end());
    files_.erase(std::unique(files_.begin(), files_.end()), files_.end());
    std::ofstream f(root_ / "produced_files.txt", std::ios::binary);
    for (const auto& p : files_) f << p << '\n';
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

std::string fmt(double v) { return format_double(v); }

std::string short_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path manifest_path(const RunConfig& config) {
  const std::string data = config.str("data");
  return data.empty() ? fs::path(config.str("out")) / "manifest.txt" : fs::path(data);
}

void check_task(const std::string& task) {
  if (task != "forces" && task != "refinement" && task != "gravity") {
    fail("unknown task '" + task + "' (expected forces, refinement or gravity)");
  }
}

void check_lmax(int lmax) {
  if (lmax < 0 || lmax > kMaxOrder) fail("lmax must be 0, 1 or 2");
}

struct SplitCounts {
  int train, val, test;
};

SplitCounts split_counts(int n, const std::string& task) {
  if (task == "refinement") {
    const int train = static_cast<int>(std::lround(n * 13.0 / 21.0));
    const int val = static_cast<int>(std::lround(n * 4.0 / 21.0));
    return {train, val, n - train - val};
  }
  return {n / 2, n / 4, n - n / 2 - n / 4};
}

std::string split_of(int i, const SplitCounts& c) {
  if (i < c.train) return "train";
  if (i < c.train + c.val) return "val";
  return "test";
}

std::vector<double> gravity_masses(const AtomSystem& s, const std::vector<std::string>& vocabulary) {
  std::vector<double> m;
  for (const auto& e : s.elements) {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), e);
    if (it == vocabulary.end()) fail("element '" + e + "' not in vocabulary");
    m.push_back(static_cast<double>(it - vocabulary.begin()) + 1.0);
  }
  return m;
}

}  // namespace

std::vector<std::string> task_vocabulary(const std::string& task) {
  check_task(task);
  return task == "refinement" ? kNucleicVocabulary : kProteinVocabulary;
}

double target_rms(const std::vector<AtomSystem>& systems) {
  double sum = 0.0;
  long n = 0;
  for (const auto& s : systems) {
    if (!s.targets) continue;
    for (int a = 0; a < s.size(); ++a) {
      if (!s.predict_mask[a]) continue;
      sum += (*s.targets)[a].squaredNorm();
      ++n;
    }
  }
  const double rms = n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
  return rms > 0.0 ? rms : 1.0;
}

std::pair<double, double> mean_sem(const std::vector<double>& values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(values.size()))};
}

std::string metrics_csv_header() {
  return "label,n_atoms,magnitude_mae,angle_mean,tensor_mae,pearson,rel_tensor_err\n";
}

std::string metrics_csv_row(const std::string& label, const MetricsReport& m) {
  return label + "," + std::to_string(m.n_atoms) + "," + fmt(m.magnitude_mae) + "," + fmt(m.angle_mean) + "," +
         fmt(m.tensor_mae) + "," + fmt(m.pearson_magnitude) + "," + fmt(m.relative_tensor_error) + "\n";
}

int cmd_generate(const RunConfig& config, std::ostream& log) {
  const std::string task = config.str("task");
  check_task(task);
  const int n = config.integer("systems");
  const int atoms = config.integer("atoms");
  const std::uint64_t seed = config.unsigned_integer("seed");
  if (n < 1) fail("systems must be at least 1");

  std::vector<ManifestEntry> manifest;
  Outputs out(config.str("out"));

  if (task == "forces") {
    LJClusterSettings s;
    s.n_systems = n;
    s.atoms_per_system = atoms;
    s.box = config.real("box");
    s.seed = seed;
    s.solvent_fraction = config.real("solvent_fraction");
    auto systems = generate_lj_clusters(s);
    const SplitCounts c = split_counts(n, task);
    for (int i = 0; i < n; ++i) {
      round_to_format(systems[i]);
      systems[i].targets = lj_forces(systems[i].positions, systems[i].elements, s.params);
      manifest.push_back({write_system(out.root(), "systems", systems[i]), split_of(i, c)});
    }
  } else if (task == "gravity") {
    const auto vocab = task_vocabulary(task);
    auto systems = gravity_toy(n, atoms, seed, vocab);
    const SplitCounts c = split_counts(n, task);
    for (int i = 0; i < n; ++i) {
      round_to_format(systems[i]);
      systems[i].targets = gravity_accelerations(systems[i].positions, gravity_masses(systems[i], vocab));
      manifest.push_back({write_system(out.root(), "systems", systems[i]), split_of(i, c)});
    }
  } else {
    const double noise = config.real("noise");
    if (!(noise > 0.0)) {
      log << "warning: noise " << noise << " gives all-zero refinement targets; refusing to write a degenerate dataset\n";
      fail("degenerate dataset: refinement noise must be positive");
    }
    ChainSettings cs;
    cs.n_structures = n;
    cs.atoms_per_structure = atoms;
    cs.seed = seed;
    auto natives = generate_chain_structures(cs);
    for (auto& s : natives) round_to_format(s);
    const int k = config.integer("k");
    const int per = config.integer("candidates");
    const SplitCounts c = split_counts(n, task);
    for (int i = 0; i < n; ++i) {
      manifest.push_back({write_system(out.root(), "natives", natives[i]), "native"});
      auto examples = make_refinement_dataset({natives[i]}, noise, per, substream(seed, "candidates", i)(), k);
      for (auto& ex : examples) {
        AtomSystem& cand = ex.pair.candidate;
        round_to_format(cand);
        const RefinementField f = refinement_field({cand, ex.pair.target}, k);
        cand.targets = f.vectors;
        for (int a = 0; a < cand.size(); ++a) cand.predict_mask[a] = f.degenerate[a] ? 0 : 1;
        manifest.push_back({write_system(out.root(), "systems", cand), split_of(i, c)});
      }
    }
  }
  for (const auto& e : manifest) {
    out.add(e.path);
    const fs::path vec = fs::path(e.path).replace_extension(".vec.csv");
    if (fs::exists(out.root() / vec)) out.add(vec.generic_string());
  }
  write_manifest(out.path("manifest.txt"), manifest);
  out.write("run_config.txt", config.dump());
  out.finish();
  log << "wrote " << manifest.size() << " structures to " << out.root().string() << "\n";
  return kExitOk;
}

namespace {

struct ReplicateResult {
  double best_validation_loss;
  MetricsReport metrics;
};

std::string history_csv(const TrainHistory& h) {
  std::string s = "batch,split,loss,magnitude_mae,angle_mean,tensor_mae,pearson,rel_tensor_err\n";
  for (std::size_t i = 0; i < h.train_loss.size(); ++i) {
    s += std::to_string(i + 1) + ",train," + fmt(h.train_loss[i]) + ",nan,nan,nan,nan,nan\n";
  }
  for (const auto& r : h.validation) {
    const MetricsReport& m = r.metrics;
    s += std::to_string(r.batch) + ",val," + fmt(r.loss) + "," + fmt(m.magnitude_mae) + "," + fmt(m.angle_mean) + "," +
         fmt(m.tensor_mae) + "," + fmt(m.pearson_magnitude) + "," + fmt(m.relative_tensor_error) + "\n";
  }
  return s;
}

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& log) {
  const std::string task = config.str("task");
  check_task(task);
  const int lmax = config.integer("lmax");
  check_lmax(lmax);
  const fs::path manifest = manifest_path(config);
  const auto train_set = load_split(manifest, "train");
  const auto val_set = load_split(manifest, "val");
  const auto test_set = load_split(manifest, "test");
  if (train_set.empty()) fail("manifest '" + manifest.string() + "' has no training systems");
  const auto& report_set = test_set.empty() ? val_set : test_set;
  const std::string report_split = test_set.empty() ? "val" : "test";

  TrainConfig tc;
  tc.learning_rate = config.real("lr");
  tc.huber_delta = config.delta();
  tc.total_batches = config.integer("batches");
  tc.optimizer = parse_optimizer(config.str("optimizer"));
  tc.validation_interval = config.integer("validation_interval");
  tc.validate();

  const int replicates = config.integer("replicates");
  if (replicates < 1) fail("replicates must be at least 1");
  const std::string resume = config.str("resume");
  if (!resume.empty() && replicates != 1) fail("resume works on a single replicate");

  Outputs out(config.str("out"));
  std::vector<ReplicateResult> results;
  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t seed = config.unsigned_integer("seed") + static_cast<std::uint64_t>(r);
    std::optional<Model> model;
    std::optional<TrainState> state;
    TrainConfig rc = tc;
    rc.seed = seed;
    if (!resume.empty()) {
      LoadedCheckpoint ck = load_checkpoint(resume);
      if (!ck.state || !ck.train_config) fail("'" + resume + "' holds no training state to resume");
      model = std::move(ck.model);
      state = std::move(ck.state);
      rc = *ck.train_config;
      rc.total_batches = tc.total_batches;
      log << "resuming at batch " << state->completed_batches << "\n";
    } else {
      ModelConfig mc;
      mc.max_order = lmax;
      mc.vocabulary = task_vocabulary(task);
      mc.neighbors = config.integer("k");
      mc.seed = seed;
      mc.output_scale = target_rms(train_set);
      model.emplace(mc);
    }
    log << "replicate " << r << ": seed " << seed << ", " << model->parameters().total_size() << " parameters, "
        << train_set.size() << " training systems\n";
    const TrainState result = train(*model, train_set, val_set, rc, std::move(state),
                                    [&](int batch, const TrainHistory& h) {
                                      log << "  batch " << batch;
                                      if (!h.validation.empty()) log << "  val loss " << short_number(h.validation.back().loss);
                                      log << "\n";
                                    });

    const std::string dir = replicates > 1 ? "replicate_" + std::to_string(r) + "/" : "";
    save_checkpoint(out.path(dir + "last.json"), *model, &rc, &result);
    model->parameters() = result.best_parameters;
    save_checkpoint(out.path(dir + "checkpoint.json"), *model, &rc);
    out.write(dir + "history.csv", history_csv(result.history));

    ReplicateResult rr;
    rr.best_validation_loss = result.history.best_validation_loss;
    if (!report_set.empty()) rr.metrics = evaluate_metrics(*model, report_set);
    results.push_back(rr);
  }

  // Table-style summary: best replicate by validation loss, then mean +- sem.
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].best_validation_loss < results[best].best_validation_loss) best = i;
  }
  std::string reps = metrics_csv_header();
  for (std::size_t i = 0; i < results.size(); ++i) reps += metrics_csv_row("replicate_" + std::to_string(i), results[i].metrics);
  out.write("replicates.csv", reps);

  const std::vector<std::pair<std::string, double MetricsReport::*>> fields = {
      {"magnitude_mae", &MetricsReport::magnitude_mae},
      {"angle_mean", &MetricsReport::angle_mean},
      {"tensor_mae", &MetricsReport::tensor_mae},
      {"pearson", &MetricsReport::pearson_magnitude},
      {"rel_tensor_err", &MetricsReport::relative_tensor_error}};
  std::string summary = "metric,split,best,mean,sem,summary\n";
  auto add_row = [&](const std::string& name, const std::vector<double>& values, double best_value) {
    const auto [mean, sem] = mean_sem(values);
    summary += name + "," + report_split + "," + fmt(best_value) + "," + fmt(mean) + "," + fmt(sem) + "," +
               short_number(best_value) + " (" + short_number(mean) + " \xC2\xB1 " + short_number(sem) + ")\n";
  };
  for (const auto& [name, member] : fields) {
    std::vector<double> values;
    for (const auto& r : results) values.push_back(r.metrics.*member);
    add_row(name, values, results[best].metrics.*member);
  }
  std::vector<double> losses;
  for (const auto& r : results) losses.push_back(r.best_validation_loss);
  add_row("val_loss", losses, results[best].best_validation_loss);
  out.write("summary.csv", summary);
  out.write("run_config.txt", config.dump());
  out.finish();
  log << summary;
  return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& log) {
  const std::string ck_path = config.str("checkpoint");
  if (ck_path.empty()) fail("eval needs --checkpoint");
  const LoadedCheckpoint ck = load_checkpoint(ck_path);
  const Model& model = *ck.model;
  const fs::path manifest = manifest_path(config);
  const std::string split = config.str("split");
  const auto systems = load_split(manifest, split);
  if (systems.empty()) fail("split '" + split + "' is empty in '" + manifest.string() + "'");
  const auto train_set = load_split(manifest, "train");

  Outputs out(config.str("out"));
  const bool vector_model = model.config().output_order() == 1;
  const MetricsReport m = evaluate_metrics(model, systems);

  Positions masked_targets;
  std::string scatter = "system,atom,true_magnitude,predicted_magnitude\n";
  std::string angle_mag = "system,atom,angle,abs_magnitude_error\n";
  std::vector<long> hist(36, 0);
  for (const auto& s : systems) {
    const Prediction p = model.forward(s);
    for (int a = 0; a < s.size(); ++a) {
      if (!s.predict_mask[a]) continue;
      const Eigen::Vector3d& t = (*s.targets)[a];
      masked_targets.push_back(t);
      const double pm = vector_model ? p.vectors[a].norm() : p.scalars[a];
      scatter += s.identifier + "," + std::to_string(a) + "," + fmt(t.norm()) + "," + fmt(pm) + "\n";
      if (vector_model && t.norm() >= kAngleEpsilon && p.vectors[a].norm() >= kAngleEpsilon) {
        const double ang = angle_degrees(p.vectors[a], t);
        hist[std::min(35, static_cast<int>(ang / 5.0))]++;
        angle_mag += s.identifier + "," + std::to_string(a) + "," + fmt(ang) + "," + fmt(std::abs(pm - t.norm())) + "\n";
      }
    }
  }
  std::string hist_csv = "bin_start,bin_end,count\n";
  for (int b = 0; b < 36; ++b) hist_csv += std::to_string(5 * b) + "," + std::to_string(5 * b + 5) + "," + std::to_string(hist[b]) + "\n";

  std::optional<double> reference;
  if (!train_set.empty()) {
    double sum = 0.0;
    long n = 0;
    for (const auto& s : train_set) {
      for (int a = 0; a < s.size(); ++a) {
        if (s.predict_mask[a]) {
          sum += (*s.targets)[a].norm();
          ++n;
        }
      }
    }
    if (n > 0) reference = sum / static_cast<double>(n);
  }
  const std::uint64_t seed = config.unsigned_integer("seed");
  std::string metrics = metrics_csv_header();
  metrics += metrics_csv_row("model", m);
  for (BaselineKind kind : {BaselineKind::kMeanMagnitude, BaselineKind::kRandomDirection, BaselineKind::kZero}) {
    metrics += metrics_csv_row("baseline_" + baseline_name(kind), naive_baseline(masked_targets, kind, seed, reference));
  }
  out.write("metrics.csv", metrics);
  out.write("scatter.csv", scatter);
  out.write("angle_hist.csv", hist_csv);
  out.write("angle_vs_mag.csv", angle_mag);
  out.finish();
  log << metrics;
  return kExitOk;
}

int cmd_refine(const RunConfig& config, std::ostream& log) {
  const std::string cpath = config.str("candidate"), tpath = config.str("target");
  if (cpath.empty() || tpath.empty()) fail("refine needs --candidate and --target");
  const int k = config.integer("k");
  const double step = config.real("step");
  if (!(step > 0.0 && step <= 1.0)) fail("step must be in (0, 1]");
  std::vector<std::string> warnings;
  StructurePair pair{read_structure_file(cpath, &warnings), read_structure_file(tpath, &warnings)};
  for (const auto& w : warnings) log << "warning: " << w << "\n";

  Outputs out(config.str("out"));
  const RefinementField field = refinement_field(pair, k);
  write_vector_file(out.path("field.csv").string(), {pair.candidate.elements, field.vectors, field.degenerate});

  Positions used = field.vectors;
  if (!config.str("checkpoint").empty()) {
    const LoadedCheckpoint ck = load_checkpoint(config.str("checkpoint"));
    if (ck.model->config().output_order() != 1) fail("refinement needs a vector (lmax >= 1) model");
    used = ck.model->forward(pair.candidate).vectors;
    write_vector_file(out.path("predicted_field.csv").string(),
                      {pair.candidate.elements, used, std::vector<std::uint8_t>(used.size(), 0)});
  }
  const AtomSystem refined = apply_refinement(pair.candidate, used, step);
  write_structure_file(out.path("refined.pdb").string(), refined);
  out.finish();

  double before = 0.0;
  for (const auto& v : field.vectors) before += v.norm();
  before /= static_cast<double>(field.vectors.size());
  const double after = mean_local_deviation({refined, pair.target}, k);
  log << "mean local deviation: " << short_number(before) << " A before, " << short_number(after) << " A after\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& log) {
  VerificationSettings s = verification_level(config.str("level"));
  s.seed = config.unsigned_integer("seed");
  s.inject_fault = config.flag("inject_fault");
  const VerificationReport report = run_verification(s);

  std::string csv = "check,passed,value,threshold,detail\n";
  for (const auto& c : report.checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << short_number(c.value) << " < " << short_number(c.threshold);
    if (!c.detail.empty()) log << "  (" << c.detail << ")";
    log << "\n";
    csv += c.name + "," + (c.passed ? "1" : "0") + "," + fmt(c.value) + "," + fmt(c.threshold) + ",\"" + c.detail + "\"\n";
  }
  std::string layers = "model,layer,kind,max_relative_deviation\n";
  log << "per-layer max equivariance deviation:\n";
  for (const auto& [tag, l] : report.layers) {
    log << "  " << tag << " " << l.layer << " (" << l.kind << "): " << short_number(l.max_relative_deviation) << "\n";
    layers += tag + "," + l.layer + "," + l.kind + "," + fmt(l.max_relative_deviation) + "\n";
  }
  Outputs out(config.str("out"));
  out.write("verify_report.csv", csv);
  out.write("layer_equivariance.csv", layers);
  out.finish();
  log << (report.passed() ? "verification passed\n" : "verification FAILED\n");
  return report.passed() ? kExitOk : kExitVerification;
}

}  // namespace tfk
