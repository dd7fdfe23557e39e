#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "stimfolio/errors.hpp"
#include "stimfolio/pipeline/csv.hpp"
#include "stimfolio/pipeline/manifest.hpp"
#include "stimfolio/pipeline/stages.hpp"

namespace stimfolio::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json maybe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json build_report(const std::string& run_dir) {
  auto file = [&](const char* name) { return (fs::path(run_dir) / name).string(); };
  if (!RunManifest::exists(run_dir)) throw ConfigError("no run manifest in " + run_dir);
  const RunManifest manifest = RunManifest::load(run_dir);
  if (!manifest.verify(run_dir, "tangent"))
    throw ConfigError("run in " + run_dir + " is incomplete (last completed stage: " +
                      (manifest.last_completed_stage().empty() ? std::string("none")
                                                               : manifest.last_completed_stage()) +
                      ")");

  json rep;
  rep["config_sha256"] = manifest.config_sha256;
  rep["artifact_version"] = manifest.artifact_version;

  // Screen audit.
  const CsvTable scored = CsvTable::read(file("scored.csv"));
  std::map<std::string, std::pair<int, int>> counts;
  double worst_volume = 0.0, worst_energy = 0.0;
  for (std::size_t r = 0; r < scored.rows(); ++r) {
    auto& c = counts[scored.at(r, "family")];
    if (scored.at(r, "status") == "ok") {
      ++c.first;
      worst_volume = std::max(worst_volume, scored.number(r, "volume_balance_error"));
      worst_energy = std::max(worst_energy, scored.number(r, "energy_balance_error"));
    } else {
      ++c.second;
    }
  }
  json screen = json::object();
  for (const auto& [f, c] : counts) screen[f] = {{"accepted", c.first}, {"failed", c.second}};
  screen["max_volume_balance_error"] = worst_volume;
  screen["max_energy_balance_error"] = worst_energy;
  rep["screen"] = screen;

  // Member statistics.
  const CsvTable stats = CsvTable::read(file("stats.csv"));
  json members = json::object();
  double best_single_ret = -1.0, best_single_risk = 0.0;
  double best_exl_risk = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < stats.rows(); ++r) {
    const std::string role = stats.at(r, "role");
    const bool ok = stats.at(r, "status") == "ok";
    const double ret = ok ? stats.number(r, "mean_efficiency") : std::nan("");
    const double risk = ok ? stats.number(r, "risk") : std::nan("");
    members[role].push_back({{"design_id", stats.at(r, "design_id")},
                             {"status", stats.at(r, "status")},
                             {"mean_efficiency", maybe(ret)},
                             {"risk", maybe(risk)}});
    if (!ok) continue;
    if (role == "uniform_single" && ret > best_single_ret) {
      best_single_ret = ret;
      best_single_risk = risk;
    }
    if (role == "exl_portfolio") best_exl_risk = std::min(best_exl_risk, risk);
  }
  rep["members"] = members;

  // Portfolio clouds against single designs.
  const CsvTable pf = CsvTable::read(file("portfolios.csv"));
  std::map<std::string, double> min_risk, matched_risk;
  for (std::size_t r = 0; r < pf.rows(); ++r) {
    const std::string f = pf.at(r, "family");
    const double risk = pf.number(r, "risk"), ret = pf.number(r, "expected_return");
    if (!min_risk.count(f) || risk < min_risk[f]) min_risk[f] = risk;
    if (best_single_ret > 0.0 && ret >= best_single_ret &&
        (!matched_risk.count(f) || risk < matched_risk[f]))
      matched_risk[f] = risk;
  }
  json cmp = json::object();
  if (best_single_ret > 0.0) {
    cmp["best_single_repeated"] = {{"efficiency", best_single_ret}, {"risk", best_single_risk}};
    for (const std::string f : {"nonuniform", "uniform"}) {
      if (!matched_risk.count(f)) {
        cmp[f + "_risk_at_matched_return"] = nullptr;
        continue;
      }
      cmp[f + "_risk_at_matched_return"] = matched_risk[f];
      cmp[f + "_risk_reduction"] = 1.0 - matched_risk[f] / best_single_risk;
    }
  }
  if (std::isfinite(best_exl_risk) && min_risk.count("exl")) {
    cmp["best_single_exl_risk"] = best_exl_risk;
    cmp["exl_portfolio_min_risk"] = min_risk["exl"];
    cmp["exl_risk_reduction"] = 1.0 - min_risk["exl"] / best_exl_risk;
  }
  rep["comparisons"] = cmp;

  std::ifstream in(file("cml.json"));
  const json cml = json::parse(in);
  rep["risk_aggregation"] = cml.at("risk_aggregation");
  rep["base_case"] = cml.at("base_case");
  json tangents = json::object();
  for (const auto& [fam, t] : cml.at("tangents").items()) {
    if (t.contains("error")) {
      tangents[fam] = {{"error", t.at("error")}};
      continue;
    }
    json s;
    for (const char* end : {"low", "high"}) {
      json p = {{"risk", t.at(end).at("risk")},
                {"expected_return", t.at(end).at("expected_return")}};
      if (t.at(end).contains("efficiency_ratio")) {
        p["efficiency_ratio"] = t.at(end).at("efficiency_ratio");
        p["risk_ratio"] = t.at(end).at("risk_ratio");
      }
      s[end] = p;
    }
    s["slope"] = t.at("slope");
    s["max_sampled_clearance"] = t.at("max_sampled_clearance");
    tangents[fam] = s;
  }
  rep["tangents"] = tangents;
  rep["primary_family"] = cml.at("primary_family");

  write_text_file(file("report.json"), rep.dump(2) + "\n");
  return rep;
}

void print_report(const json& rep, std::ostream& out) {
  auto num = [](const json& j) -> std::string {
    return j.is_number() ? format_double(j.get<double>()) : std::string("n/a");
  };
  out << "stimfolio run report (config " << rep.at("config_sha256").get<std::string>().substr(0, 12)
      << ", risk aggregation " << rep.at("risk_aggregation").get<std::string>() << ")\n";
  const auto& sc = rep.at("screen");
  out << "screen:";
  for (const char* f : {"uniform", "nonuniform", "exl"})
    if (sc.contains(f))
      out << "  " << f << " " << sc.at(f).at("accepted") << " ok / " << sc.at(f).at("failed")
          << " failed";
  out << "\n  max volume balance error " << num(sc.at("max_volume_balance_error"))
      << ", max energy balance error " << num(sc.at("max_energy_balance_error")) << "\n";

  if (rep.at("base_case").is_object())
    out << "base case: efficiency " << num(rep["base_case"]["efficiency"]) << ", risk "
        << num(rep["base_case"]["risk"]) << "\n";

  const auto& cmp = rep.at("comparisons");
  if (cmp.contains("best_single_repeated")) {
    out << "best single repeated design: efficiency "
        << num(cmp["best_single_repeated"]["efficiency"]) << ", risk "
        << num(cmp["best_single_repeated"]["risk"]) << "\n";
    for (const char* f : {"nonuniform", "uniform"}) {
      const std::string k = std::string(f) + "_risk_reduction";
      out << "  " << f << " portfolios at matched return: risk "
          << num(cmp.value(std::string(f) + "_risk_at_matched_return", json())) << " (reduction "
          << num(cmp.value(k, json())) << ")\n";
    }
  }
  if (cmp.contains("exl_risk_reduction"))
    out << "low-risk family: best single risk " << num(cmp["best_single_exl_risk"])
        << ", portfolio min risk " << num(cmp["exl_portfolio_min_risk"]) << " (reduction "
        << num(cmp["exl_risk_reduction"]) << ")\n";

  for (const auto& [fam, t] : rep.at("tangents").items()) {
    if (t.contains("error")) {
      out << "tangent " << fam << ": " << t["error"].get<std::string>() << "\n";
      continue;
    }
    out << "tangent " << fam << ": slope " << num(t["slope"]) << "\n";
    for (const char* end : {"low", "high"}) {
      const auto& p = t.at(end);
      out << "  " << end << " point: risk " << num(p["risk"]) << ", efficiency "
          << num(p["expected_return"]);
      if (p.contains("efficiency_ratio"))
        out << " (x" << num(p["efficiency_ratio"]) << " efficiency, x" << num(p["risk_ratio"])
            << " risk vs base)";
      out << "\n";
    }
  }
}

}  // namespace stimfolio::pipeline
