#pragma once

// Experiment runners behind the command-line tool: decay-rate studies for
// Erdos-Renyi degree events, finite-n exponent-gap studies, and thin
// delegations that parse inputs and serialize results.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "typedld/oracle.hpp"
#include "typedld/optimizer.hpp"

namespace typedld {

enum class OutputFormat { csv, json };

/// One subcommand invocation. `body` holds the kind-specific fields of the
/// config file; relative file references resolve against `base_dir`.
struct ExperimentConfig {
  std::string kind;
  Json body = Json::object();
  std::optional<std::uint64_t> seed;
  std::uint64_t samples = 1;
  OutputFormat format = OutputFormat::json;
  std::filesystem::path base_dir = ".";
  /// Worker threads for sampling loops; 0 picks hardware concurrency. Never affects output.
  std::size_t threads = 0;
};

/// Validates the invariants shared by all kinds (samples >= 1, seed for stochastic kinds).
ExperimentConfig make_experiment_config(std::string kind, Json body, std::optional<std::uint64_t> seed,
                                        std::optional<OutputFormat> format, std::filesystem::path base_dir);

struct ExperimentRecord {
  std::size_t n;
  std::string event;
  /// -(1/n) log(hits/samples); absent when no sample hit the event.
  std::optional<double> estimate;
  std::optional<double> stderr_estimate;
  double predicted;
  std::uint64_t samples;
  std::uint64_t hits;
};

struct DecayStudy {
  double c;
  std::vector<std::size_t> n_values;
  ConstraintSet event;
  std::string event_id = "event";
  std::uint64_t samples;
  std::uint64_t seed;
  std::size_t threads = 0;
};

/// Number of seed-derived substreams each n is split into.
inline constexpr std::uint64_t kShards = 64;

/// Hits of `event` among `samples` draws of G(n, m); shard i of n draws from
/// Rng(substream_seed(seed, (n << 32) | i)), so the count is thread-count independent.
std::uint64_t count_event_hits(std::size_t n, std::uint64_t m, const ConstraintSet& event, std::uint64_t samples,
                               std::uint64_t seed, std::size_t threads);

/// Skips (and reports in `warnings`) any n with n c / 2 not integral.
std::vector<ExperimentRecord> run_decay_study(const DecayStudy& study, std::vector<std::string>* warnings = nullptr);

std::string records_to_csv(const std::vector<ExperimentRecord>& records);
Json records_to_json(const std::vector<ExperimentRecord>& records);

/// Least-squares slope of -log(hits/samples) against n over records with hits.
std::optional<double> fitted_decay_slope(const std::vector<ExperimentRecord>& records);

std::string gaps_to_csv(const std::vector<GapPoint>& gaps);
Json gaps_to_json(const std::vector<GapPoint>& gaps);

/// Class counts of sample_conditional_graph over seeded substreams, keyed by class key.
std::map<std::string, std::uint64_t> monte_carlo_class_counts(const ConditionSpec& spec, std::uint64_t samples,
                                                              std::uint64_t seed, std::size_t threads = 0);

DecayStudy decay_study_from_config(const ExperimentConfig& config);
std::vector<LldpTarget> lldp_family_from_config(const ExperimentConfig& config);

std::vector<ExperimentRecord> run_decay_study(const ExperimentConfig& config, std::vector<std::string>* warnings);
std::vector<GapPoint> run_lldp_study(const ExperimentConfig& config);
Json run_measure(const ExperimentConfig& config);
Json run_rate(const ExperimentConfig& config);
Json run_optimize(const ExperimentConfig& config);
Json run_enumerate(const ExperimentConfig& config);
std::string run_sample(const ExperimentConfig& config);

/// Dispatches on config.kind and returns the serialized output.
std::string run_experiment(const ExperimentConfig& config, std::vector<std::string>* warnings = nullptr);

}  // namespace typedld
