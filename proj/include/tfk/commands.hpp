#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tfk/metrics.hpp"
#include "tfk/model.hpp"
#include "tfk/run_config.hpp"

namespace tfk {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitVerification = 2, kExitDivergence = 3 };

/// Element vocabulary used for a task name.
std::vector<std::string> task_vocabulary(const std::string& task);

/// Root-mean-square target magnitude over masked atoms (1 when all zero).
double target_rms(const std::vector<AtomSystem>& systems);

/// Mean and standard error of the mean (0 for a single value).
std::pair<double, double> mean_sem(const std::vector<double>& values);

/// Header and one row of the metrics CSV layout shared by all commands.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& label, const MetricsReport& m);

// Each command writes only under config "out" and finishes with
// <out>/produced_files.txt. Errors are thrown; the return value is an exit code.
int cmd_generate(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_eval(const RunConfig& config, std::ostream& log);
int cmd_refine(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

}  // namespace tfk
