#include "stimfolio/pipeline/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "stimfolio/errors.hpp"
#include "stimfolio/pipeline/digest.hpp"

namespace stimfolio::pipeline {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer() && !it->is_number_unsigned()) throw ConfigError("");
        if (it->is_number_integer() && it->template get<long long>() < 0)
          throw ConfigError(path_ + "." + key + ": must be non-negative");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("");
      }
      out = it->template get<T>();
    } catch (const ConfigError& e) {
      if (std::string(e.what()).empty())
        throw ConfigError(path_ + "." + key + ": wrong value type");
      throw;
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong value type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string sub(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key \"" + it.key() + "\"");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json range_json(const ParamRange& r) {
  return {{"lo", r.lo}, {"hi", r.hi}, {"scale", r.scale == AxisScale::log ? "log" : "linear"}};
}

void read_range(ObjectReader& parent, const char* key, ParamRange& r) {
  const json* j = parent.child(key);
  if (!j) return;
  ObjectReader rd(*j, parent.sub(key));
  rd.get("lo", r.lo);
  rd.get("hi", r.hi);
  std::string scale = r.scale == AxisScale::log ? "log" : "linear";
  rd.get("scale", scale);
  if (scale == "log")
    r.scale = AxisScale::log;
  else if (scale == "linear")
    r.scale = AxisScale::linear;
  else
    throw ConfigError(parent.sub(key) + ".scale: expected \"linear\" or \"log\"");
  rd.finish();
}

json design_json(const StageDesign& d) {
  return {{"design_id", d.design_id},
          {"n_fractures", d.n_fractures},
          {"stage_length_m", d.stage_length_m},
          {"spacing_ratio", d.spacing_ratio},
          {"injection_rate_m3_per_s", d.injection_rate_m3_per_s},
          {"treating_time_s", d.treating_time_s},
          {"viscosity_pa_s", d.viscosity_pa_s},
          {"perf_factor_pa_s2_per_m6", d.perf_factor_pa_s2_per_m6}};
}

void read_design(const json& j, const std::string& path, StageDesign& d) {
  ObjectReader rd(j, path);
  rd.get("design_id", d.design_id);
  rd.get("n_fractures", d.n_fractures);
  rd.get("stage_length_m", d.stage_length_m);
  rd.get("spacing_ratio", d.spacing_ratio);
  rd.get("injection_rate_m3_per_s", d.injection_rate_m3_per_s);
  rd.get("treating_time_s", d.treating_time_s);
  rd.get("viscosity_pa_s", d.viscosity_pa_s);
  rd.get("perf_factor_pa_s2_per_m6", d.perf_factor_pa_s2_per_m6);
  rd.finish();
}

bool plain_id(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace

RunConfig::RunConfig() {
  base_case.design_id = "BASE";
  base_case.n_fractures = 5;
  base_case.injection_rate_m3_per_s = 0.2;
  base_case.stage_length_m = 50.0;
  base_case.viscosity_pa_s = 0.003;
  base_case.spacing_ratio = 0.5;
  base_case.perf_factor_pa_s2_per_m6 = 1.06e10;
  base_case.treating_time_s =
      stage_volume_share(50.0, design_space.well_volume_m3, design_space.lateral_length_m) / 0.2;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  try {
    design_space.validate();
    exl.perforation_loss_pa.validate("exl.perforation_loss_pa");
    base_case.validate();
  } catch (const DomainError& e) {
    fail(e.what());
  }
  if (!plain_id(base_case.design_id)) fail("base_case.design_id must be [A-Za-z0-9_-]+");
  if (candidates.uniform < 1 || candidates.nonuniform < 1 || candidates.exl < 1)
    fail("candidates: every family needs at least one candidate");
  if (!(uncertainty_level > 0.0 && uncertainty_level < 2.0))
    fail("uncertainty_level must lie in (0, 2)");
  if (realizations_per_design < 2) fail("realizations_per_design must be >= 2");
  if (selection_count < 1) fail("selection_count must be >= 1");
  if (mixture_samples < 1) fail("mixture_samples must be >= 1");
  if (!(inflection_efficiency > 0.0)) fail("inflection_efficiency must be > 0");
  if (!(exl.viscosity_pa_s > 0.0 && exl.injection_rate_m3_per_s > 0.0 &&
        exl.stage_length_m > 0.0))
    fail("exl: viscosity, rate and stage length must be > 0");
  if (!(rock.youngs_modulus_pa > 0.0 && rock.closure_stress_pa > 0.0 &&
        rock.toughness_pa_sqrt_m > 0.0 && rock.leakoff_reference_m_per_sqrt_s >= 0.0 &&
        rock.poisson_ratio > 0.0 && rock.poisson_ratio < 0.5))
    fail("rock: properties out of range");
  const auto& s = solver;
  if (!(s.initial_time_step_s > 0.0 && s.time_step_growth >= 1.0 &&
        s.max_time_step_fraction > 0.0 && s.max_time_step_fraction <= 1.0 &&
        s.viscous_alpha >= 0.0 && s.leakoff_min_time_s > 0.0 && s.seed_radius_m > 0.0 &&
        s.max_iterations >= 1 && s.pressure_rel_tol > 0.0 && s.volume_balance_tolerance > 0.0))
    fail("solver: controls out of range");
}

DesignSpace RunConfig::family_space(const std::string& family) const {
  DesignSpace s = design_space;
  if (family == "uniform") {
    s.id_prefix = "UFS";
    s.spacing_ratio = {0.5, 0.5, AxisScale::linear};
  } else if (family == "nonuniform") {
    s.id_prefix = "NFS";
  } else if (family == "exl") {
    s.id_prefix = "EXL";
    s.perforation_loss_pa = exl.perforation_loss_pa;
    s.injection_rate_m3_per_s = {exl.injection_rate_m3_per_s, exl.injection_rate_m3_per_s};
    s.viscosity_pa_s = {exl.viscosity_pa_s, exl.viscosity_pa_s};
    s.stage_length_m = {exl.stage_length_m, exl.stage_length_m};
    s.spacing_ratio = {0.5, 0.5, AxisScale::linear};
  } else {
    throw ConfigError("unknown design family \"" + family + "\"");
  }
  return s;
}

json to_json(const RunConfig& c) {
  const auto& ds = c.design_space;
  const auto& s = c.solver;
  return {
      {"master_seed", c.master_seed},
      {"design_space",
       {{"perforation_loss_pa", range_json(ds.perforation_loss_pa)},
        {"injection_rate_m3_per_s", range_json(ds.injection_rate_m3_per_s)},
        {"viscosity_pa_s", range_json(ds.viscosity_pa_s)},
        {"stage_length_m", range_json(ds.stage_length_m)},
        {"spacing_ratio", range_json(ds.spacing_ratio)},
        {"n_fractures", ds.n_fractures},
        {"well_volume_m3", ds.well_volume_m3},
        {"lateral_length_m", ds.lateral_length_m}}},
      {"candidates",
       {{"uniform", c.candidates.uniform},
        {"nonuniform", c.candidates.nonuniform},
        {"exl", c.candidates.exl}}},
      {"exl",
       {{"viscosity_pa_s", c.exl.viscosity_pa_s},
        {"injection_rate_m3_per_s", c.exl.injection_rate_m3_per_s},
        {"stage_length_m", c.exl.stage_length_m},
        {"perforation_loss_pa", range_json(c.exl.perforation_loss_pa)}}},
      {"rock",
       {{"leakoff_reference_m_per_sqrt_s", c.rock.leakoff_reference_m_per_sqrt_s},
        {"youngs_modulus_pa", c.rock.youngs_modulus_pa},
        {"poisson_ratio", c.rock.poisson_ratio},
        {"closure_stress_pa", c.rock.closure_stress_pa},
        {"toughness_pa_sqrt_m", c.rock.toughness_pa_sqrt_m}}},
      {"uncertainty_level", c.uncertainty_level},
      {"constant_rock_properties", c.constant_rock_properties},
      {"realizations_per_design", c.realizations_per_design},
      {"selection_count", c.selection_count},
      {"inflection_efficiency", c.inflection_efficiency},
      {"mixture_samples", c.mixture_samples},
      {"base_case", design_json(c.base_case)},
      {"solver",
       {{"initial_time_step_s", s.initial_time_step_s},
        {"time_step_growth", s.time_step_growth},
        {"max_time_step_fraction", s.max_time_step_fraction},
        {"viscous_alpha", s.viscous_alpha},
        {"leakoff_min_time_s", s.leakoff_min_time_s},
        {"seed_radius_m", s.seed_radius_m},
        {"max_iterations", s.max_iterations},
        {"pressure_rel_tol", s.pressure_rel_tol},
        {"volume_balance_tolerance", s.volume_balance_tolerance}}},
      {"risk_aggregation", to_string(c.risk_aggregation)},
      {"workers", c.workers},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  ObjectReader rd(j, "config");
  rd.get("master_seed", c.master_seed);
  if (const json* ds = rd.child("design_space")) {
    ObjectReader r(*ds, "config.design_space");
    auto& d = c.design_space;
    read_range(r, "perforation_loss_pa", d.perforation_loss_pa);
    read_range(r, "injection_rate_m3_per_s", d.injection_rate_m3_per_s);
    read_range(r, "viscosity_pa_s", d.viscosity_pa_s);
    read_range(r, "stage_length_m", d.stage_length_m);
    read_range(r, "spacing_ratio", d.spacing_ratio);
    r.get("n_fractures", d.n_fractures);
    r.get("well_volume_m3", d.well_volume_m3);
    r.get("lateral_length_m", d.lateral_length_m);
    r.finish();
  }
  if (const json* cc = rd.child("candidates")) {
    ObjectReader r(*cc, "config.candidates");
    r.get("uniform", c.candidates.uniform);
    r.get("nonuniform", c.candidates.nonuniform);
    r.get("exl", c.candidates.exl);
    r.finish();
  }
  if (const json* ex = rd.child("exl")) {
    ObjectReader r(*ex, "config.exl");
    r.get("viscosity_pa_s", c.exl.viscosity_pa_s);
    r.get("injection_rate_m3_per_s", c.exl.injection_rate_m3_per_s);
    r.get("stage_length_m", c.exl.stage_length_m);
    read_range(r, "perforation_loss_pa", c.exl.perforation_loss_pa);
    r.finish();
  }
  if (const json* rk = rd.child("rock")) {
    ObjectReader r(*rk, "config.rock");
    r.get("leakoff_reference_m_per_sqrt_s", c.rock.leakoff_reference_m_per_sqrt_s);
    r.get("youngs_modulus_pa", c.rock.youngs_modulus_pa);
    r.get("poisson_ratio", c.rock.poisson_ratio);
    r.get("closure_stress_pa", c.rock.closure_stress_pa);
    r.get("toughness_pa_sqrt_m", c.rock.toughness_pa_sqrt_m);
    r.finish();
  }
  rd.get("uncertainty_level", c.uncertainty_level);
  rd.get("constant_rock_properties", c.constant_rock_properties);
  rd.get("realizations_per_design", c.realizations_per_design);
  rd.get("selection_count", c.selection_count);
  rd.get("inflection_efficiency", c.inflection_efficiency);
  rd.get("mixture_samples", c.mixture_samples);
  if (const json* bc = rd.child("base_case")) read_design(*bc, "config.base_case", c.base_case);
  if (const json* sv = rd.child("solver")) {
    ObjectReader r(*sv, "config.solver");
    auto& s = c.solver;
    r.get("initial_time_step_s", s.initial_time_step_s);
    r.get("time_step_growth", s.time_step_growth);
    r.get("max_time_step_fraction", s.max_time_step_fraction);
    r.get("viscous_alpha", s.viscous_alpha);
    r.get("leakoff_min_time_s", s.leakoff_min_time_s);
    r.get("seed_radius_m", s.seed_radius_m);
    r.get("max_iterations", s.max_iterations);
    r.get("pressure_rel_tol", s.pressure_rel_tol);
    r.get("volume_balance_tolerance", s.volume_balance_tolerance);
    r.finish();
  }
  std::string mode = to_string(c.risk_aggregation);
  rd.get("risk_aggregation", mode);
  c.risk_aggregation = risk_aggregation_from_string(mode);
  rd.get("workers", c.workers);
  rd.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string canonical_config_text(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string config_digest(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("workers");
  return sha256_hex(j.dump());
}

}  // namespace stimfolio::pipeline
