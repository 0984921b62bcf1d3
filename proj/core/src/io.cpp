#include "mixfx/io.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mixfx/chart.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/labels.hpp"
#include "mixfx/statsutil.hpp"
#include "mixfx/version.hpp"

namespace mixfx {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ConfigError(where, "cannot parse number '" + tok + "'");
  return v;
}

std::size_t parse_index(const std::string& tok, const std::string& where) {
  std::size_t v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ConfigError(where, "cannot parse index '" + tok + "'");
  return v;
}

json params_to_json(const MixtureParams& theta) {
  return json{{"weights", theta.weights},
              {"means", theta.means},
              {"omega2", theta.omega2}};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw InternalError("double formatting failed");
  return std::string(buf, p);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("", "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("", "short write to '" + path + "'");
}

void write_cohort_csv(const std::string& path, const Cohort& cohort) {
  std::string buf = "subject,t,x\n";
  for (std::size_t i = 0; i < cohort.paths.size(); ++i) {
    const Path& p = cohort.paths[i];
    for (std::size_t j = 0; j < p.times.size(); ++j) {
      buf += std::to_string(i);
      buf += ',';
      buf += format_double(p.times[j]);
      buf += ',';
      buf += format_double(p.values[j]);
      buf += '\n';
    }
  }
  write_text_file(path, buf);
}

Cohort read_cohort_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"subject", "t", "x"})
    throw ConfigError("", path + ": expected header subject,t,x");

  Cohort cohort;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto toks = split_csv_line(line);
    const std::string where = "/row/" + std::to_string(row);
    if (toks.size() != 3) throw ConfigError(where, "expected 3 columns");
    const std::size_t subject = parse_index(toks[0], where);
    if (subject == cohort.paths.size()) cohort.paths.emplace_back();
    if (subject != cohort.paths.size() - 1)
      throw ConfigError(where, "subjects must be contiguous and ordered");
    cohort.paths[subject].times.push_back(parse_double(toks[1], where));
    cohort.paths[subject].values.push_back(parse_double(toks[2], where));
    ++row;
  }
  for (std::size_t i = 0; i < cohort.paths.size(); ++i) {
    Path& p = cohort.paths[i];
    if (p.times.size() < 2)
      throw ConfigError("", "subject " + std::to_string(i) + " has fewer than 2 points");
    p.dt = p.times[1] - p.times[0];
    cohort.designs.push_back({p.values.front(), p.times.back()});
  }
  return cohort;
}

std::string cohort_sidecar_json(const Cohort& cohort) {
  json subjects = json::array();
  for (std::size_t i = 0; i < cohort.paths.size(); ++i) {
    subjects.push_back(json{{"subject", i},
                            {"phi", cohort.phi[i]},
                            {"component", cohort.component[i]},
                            {"x0", cohort.designs[i].x0},
                            {"T", cohort.designs[i].T}});
  }
  return json{{"schema_version", kSchemaVersion}, {"subjects", subjects}}.dump(2) +
         "\n";
}

void write_stats_csv(const std::string& path, std::span<const SuffStats> stats) {
  std::string buf = "subject,U,V,x0,T\n";
  for (std::size_t i = 0; i < stats.size(); ++i) {
    buf += std::to_string(i);
    buf += ',';
    buf += format_double(stats[i].U);
    buf += ',';
    buf += format_double(stats[i].V);
    buf += ',';
    buf += format_double(stats[i].x0);
    buf += ',';
    buf += format_double(stats[i].T);
    buf += '\n';
  }
  write_text_file(path, buf);
}

std::vector<SuffStats> read_stats_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) !=
          std::vector<std::string>{"subject", "U", "V", "x0", "T"})
    throw ConfigError("", path + ": expected header subject,U,V,x0,T");

  std::vector<SuffStats> stats;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto toks = split_csv_line(line);
    const std::string where = "/row/" + std::to_string(row);
    if (toks.size() != 5) throw ConfigError(where, "expected 5 columns");
    SuffStats s;
    s.U = parse_double(toks[1], where);
    s.V = parse_double(toks[2], where);
    s.x0 = parse_double(toks[3], where);
    s.T = parse_double(toks[4], where);
    stats.push_back(s);
    ++row;
  }
  return stats;
}

void write_chain_csv(const std::string& path, const Chain& chain) {
  const std::size_t M = chain.M;
  std::string buf = "iter";
  for (std::size_t k = 0; k < M; ++k) buf += ",a" + std::to_string(k);
  for (std::size_t k = 0; k < M; ++k) buf += ",mu" + std::to_string(k);
  for (std::size_t k = 0; k < M; ++k) buf += ",omega2_" + std::to_string(k);
  buf += ",log_post\n";

  for (Eigen::Index i = static_cast<Eigen::Index>(chain.burn_in);
       i < chain.draws.rows(); ++i) {
    const MixtureParams theta = canonicalize_labels(chain.mapped(i));
    buf += std::to_string(static_cast<std::size_t>(i));
    for (double v : theta.weights) buf += ',' + format_double(v);
    for (double v : theta.means) buf += ',' + format_double(v);
    for (double v : theta.omega2) buf += ',' + format_double(v);
    buf += ',' + format_double(chain.log_post[static_cast<std::size_t>(i)]);
    buf += '\n';
  }
  write_text_file(path, buf);
}

std::string chain_summary_json(const Chain& chain) {
  const std::size_t M = chain.M;
  const std::size_t kept = chain.kept();

  std::vector<std::vector<double>> cols(3 * M, std::vector<double>(kept));
  for (std::size_t i = 0; i < kept; ++i) {
    const MixtureParams theta = canonicalize_labels(
        chain.mapped(static_cast<Eigen::Index>(chain.burn_in + i)));
    for (std::size_t k = 0; k < M; ++k) {
      cols[k][i] = theta.weights[k];
      cols[M + k][i] = theta.means[k];
      cols[2 * M + k][i] = theta.omega2[k];
    }
  }

  const auto names = [&](const std::string& stem) {
    json out = json::array();
    for (std::size_t k = 0; k < M; ++k) out.push_back(stem + std::to_string(k));
    return out;
  };
  json coords = json::array();
  json name_list = names("a");
  for (const auto& n : names("mu")) name_list.push_back(n);
  for (const auto& n : names("omega2_")) name_list.push_back(n);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    coords.push_back(json{{"name", name_list[j]},
                          {"mean", mean(cols[j])},
                          {"sd", kept >= 2 ? sample_sd(cols[j]) : 0.0}});
  }

  json scales = json::array();
  for (Eigen::Index j = 0; j < chain.proposal_scale.size(); ++j)
    scales.push_back(chain.proposal_scale[j]);

  return json{{"schema_version", kSchemaVersion},
              {"M", M},
              {"draws_kept", kept},
              {"burn_in", chain.burn_in},
              {"seed", chain.seed},
              {"acceptance_rate", chain.acceptance_rate},
              {"acceptance_in_range", chain.acceptance_in_range},
              {"proposal_scale", scales},
              {"coords", coords}}
             .dump(2) +
         "\n";
}

std::string fit_json(const FitResult& fit, const std::string& method) {
  return json{{"schema_version", kSchemaVersion},
              {"method", method},
              {"theta_hat", params_to_json(fit.theta_hat)},
              {"loglik", fit.final_loglik()},
              {"loglik_trace", fit.loglik_trace},
              {"converged", fit.converged},
              {"reason", fit.reason},
              {"n", fit.n},
              {"observed_info", matrix_to_json(fit.observed_info)},
              {"diagnostics",
               json{{"excluded_degenerate", fit.diagnostics.excluded_degenerate},
                    {"boundary", fit.diagnostics.boundary},
                    {"note", fit.diagnostics.note}}}}
             .dump(2) +
         "\n";
}

std::string report_json(const ExperimentReport& rep) {
  json ladder = json::array();
  for (const auto& s : rep.ladder) {
    json row{{"n", s.n}, {"attempted", s.attempted}, {"failed", s.failed}};
    if (!s.rmse.empty()) row["rmse"] = s.rmse;
    if (!s.median_abs_err.empty()) row["median_abs_err"] = s.median_abs_err;
    if (!s.ks.empty()) row["ks"] = s.ks;
    if (!s.coverage.empty()) row["coverage"] = s.coverage;
    if (!s.median_ks.empty()) {
      row["median_ks"] = s.median_ks;
      row["median_concentration"] = s.median_concentration;
    }
    if (rep.kind == "kl_info_limits") {
      row["info_gap"] = s.info_gap;
      row["kl_gap"] = s.kl_gap;
    }
    ladder.push_back(std::move(row));
  }

  json verdicts = json::array();
  for (const auto& v : rep.verdicts)
    verdicts.push_back(json{{"name", v.name}, {"status", v.status}, {"detail", v.detail}});

  return json{{"schema_version", kSchemaVersion},
              {"kind", rep.kind},
              {"value_columns", rep.value_columns},
              {"ladder", ladder},
              {"verdicts", verdicts},
              {"all_pass", rep.all_pass()},
              {"runtime_seconds", rep.runtime_seconds}}
             .dump(2) +
         "\n";
}

void write_report_csv(const std::string& path, const ExperimentReport& rep) {
  std::string buf = "n,replicate,ok,error";
  for (const auto& c : rep.value_columns) buf += ',' + c;
  buf += '\n';
  for (const auto& r : rep.rows) {
    buf += std::to_string(r.n);
    buf += ',' + std::to_string(r.replicate);
    buf += ',';
    buf += r.ok ? "1" : "0";
    buf += ',' + csv_quote(r.error);
    for (std::size_t j = 0; j < rep.value_columns.size(); ++j)
      buf += ',' + (j < r.values.size() ? format_double(r.values[j]) : std::string());
    buf += '\n';
  }
  write_text_file(path, buf);
}

std::string RunManifest::to_json() const {
  return json{{"schema_version", kSchemaVersion},
              {"config_hash", config_hash},
              {"seed", seed},
              {"version", version},
              {"started_at", started_at},
              {"finished_at", finished_at},
              {"outputs", outputs}}
      .dump();
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace mixfx
