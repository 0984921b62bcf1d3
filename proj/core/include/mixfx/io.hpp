#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixfx/bayes.hpp"
#include "mixfx/experiments.hpp"
#include "mixfx/mle.hpp"
#include "mixfx/simulate.hpp"
#include "mixfx/suffstats.hpp"

namespace mixfx {

// All CSV numbers use the shortest decimal representation that round-trips
// (std::to_chars), so identical inputs reproduce byte-identical files.
std::string format_double(double x);

// FNV-1a 64-bit over raw bytes; hex64 renders it as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// cohort.csv: one row per (subject, grid point): subject,t,x.
void write_cohort_csv(const std::string& path, const Cohort& cohort);
Cohort read_cohort_csv(const std::string& path);

// Companion truth the CSV cannot carry: per-subject effect and component.
std::string cohort_sidecar_json(const Cohort& cohort);

// stats.csv: subject,U,V,x0,T.
void write_stats_csv(const std::string& path, std::span<const SuffStats> stats);
std::vector<SuffStats> read_stats_csv(const std::string& path);

// chain.csv: post-burn-in draws, canonicalized, one row per draw:
// iter,a*,mu*,omega2_*,log_post.
void write_chain_csv(const std::string& path, const Chain& chain);

// JSON summary of a chain: posterior means/sd per natural coordinate plus
// acceptance diagnostics.
std::string chain_summary_json(const Chain& chain);

std::string fit_json(const FitResult& fit, const std::string& method);

// report.json (runtime_seconds is its only volatile field) and report.csv
// (one row per replicate per n).
std::string report_json(const ExperimentReport& rep);
void write_report_csv(const std::string& path, const ExperimentReport& rep);

// Provenance record every command prints as its last stdout line.
struct RunManifest {
  std::string config_hash; // fnv1a64 of the config bytes, hex
  std::uint64_t seed = 0;
  std::string version;
  std::string started_at;  // ISO-8601 UTC
  std::string finished_at;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

std::string iso8601_utc_now();

} // namespace mixfx
