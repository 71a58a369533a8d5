#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moslim/datagen.hpp"
#include "moslim/policy.hpp"

namespace moslim {

/// Mean oracle score per prompted intensity for one dimension.
struct SweepResult {
  Dimension dim = Dimension::Helpfulness;
  struct Row {
    int n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    int n_samples = 0;
  };
  std::vector<Row> rows;  // sorted by n
};

/// Oracle means for all three dimensions under one max-intensity pair prompt.
struct PairingResult {
  Dimension dim_a = Dimension::Helpfulness;
  Dimension dim_b = Dimension::Honesty;
  double help_mean = 0.0;
  double honest_mean = 0.0;
  double harmless_mean = 0.0;

  double mean_for(Dimension dim) const;
};

struct BenchConfig {
  int max_len = kDefaultResponseLength;
  double temperature = 1.0;
  int prompt_length = kDefaultPromptLength;
  int workers = 1;
};

/// For each intensity n of `dim`, samples n_samples responses under the
/// prefix `<dim n>` and aggregates the oracle score of that dimension.
/// Evaluation is oracle-only: the reward model is never consulted.
SweepResult intensity_sweep(const PolicyModel& policy, Dimension dim, const DataTypeScheme& scheme,
                            int n_samples, std::uint64_t seed, const Vocabulary& vocab,
                            const BenchConfig& cfg = {});

/// All three unordered dimension pairs at max intensity.
std::vector<PairingResult> pairing_eval(const PolicyModel& policy, const DataTypeScheme& scheme,
                                        int n_samples, std::uint64_t seed, const Vocabulary& vocab,
                                        const BenchConfig& cfg = {});

/// CSV renderings (schema: sweep "dim,n,mean,std,n_samples"; pairing
/// "dimA,dimB,help_mean,honest_mean,harmless_mean").
std::string sweep_to_csv(const SweepResult& result);
std::string pairing_to_csv(const std::vector<PairingResult>& results);
SweepResult sweep_from_csv(const std::string& text);
std::vector<PairingResult> pairing_from_csv(const std::string& text);

/// Line chart for a sweep / radar chart for the pairing table.
std::string sweep_to_svg(const SweepResult& result);
std::string pairing_to_svg(const std::vector<PairingResult>& results);

struct ReportPaths {
  std::vector<std::string> files;
};

/// Writes one CSV and one SVG per result into out_dir; deterministic content
/// for identical inputs.
ReportPaths report(const std::vector<SweepResult>& sweeps,
                   const std::vector<PairingResult>& pairings, const std::string& out_dir);

/// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

}  // namespace moslim
