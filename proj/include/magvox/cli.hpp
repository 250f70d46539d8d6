#pragma once

// Command-line front end: validate, slice, verify and preview subcommands.
//
// Exit codes: 0 ok, 1 internal, 2 input, 3 validation, 4 verification.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "magvox/actuation_preview.hpp"
#include "magvox/gcode.hpp"
#include "magvox/ingest.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/magnetostatics.hpp"
#include "magvox/path_planner.hpp"
#include "magvox/reports.hpp"
#include "magvox/virtual_printer.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kInternal = 1, kInput = 2, kValidation = 3, kVerification = 4 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input:
    case ErrorKind::Parse:
    case ErrorKind::Config: return kInput;
    case ErrorKind::Validation: return kValidation;
    case ErrorKind::Verification: return kVerification;
    case ErrorKind::Domain:
    case ErrorKind::Convergence: return kInternal;
  }
  return kInternal;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Input, fmt::format("input not found: {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Input, fmt::format("cannot write output: {}", path.string()));
  out << text;
}

/// Prefixes parse errors with the file they came from.
template <typename F>
auto with_file(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

inline MachineConfig load_config(const std::string& path) {
  if (path.empty()) return MachineConfig{};
  const auto text = read_file(path);
  return with_file(path, [&] { return parse_config(text); });
}

/// "worm.geom.csv" -> "worm"
inline std::string stem_of(const std::string& path) {
  std::string s = fs::path(path).filename().string();
  for (const char* suffix : {".csv", ".geom", ".mag", ".gcode", ".json", ".scenario"}) {
    const std::string suf = suffix;
    if (s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0) s.resize(s.size() - suf.size());
  }
  return s;
}

inline Design load_design(const std::string& mag_path, const std::string& geom_path, const MachineConfig& cfg,
                          const std::string& name) {
  const auto mag_text = read_file(mag_path);
  const auto geom_text = read_file(geom_path);
  const auto mag = with_file(mag_path, [&] { return parse_magnetization(mag_text); });
  const auto geom = with_file(geom_path, [&] { return parse_geometry(geom_text); });
  return merge_datasets(mag, geom, cfg.position_convention, name);
}

inline OrderMode parse_order(const std::string& s) {
  if (s == "hypot") return OrderMode::Hypotenuse;
  if (s == "nn") return OrderMode::NearestNeighbor;
  throw Error(ErrorKind::Config, fmt::format("unknown order '{}'", s));
}

// ---------------------------------------------------------------------------
// Scenario files

struct ChainSpec {
  std::string name;
  actuation::ChainAxis axis{actuation::ChainAxis::PosX};
  std::vector<VoxelId> ids;  // empty: whole design
  std::optional<Vec3> bend_axis;
};

struct BodySpec {
  magnetics::MagneticBody body;
  Vec3 position{};  // mm
};

struct Scenario {
  std::string name;
  std::string mag_path;
  std::string geom_path;
  actuation::Material material{};
  std::optional<double> magnetization;  // A/m applied to every voxel
  magnetics::FieldSource source{magnetics::Uniform{}};
  std::vector<ChainSpec> chains;
  std::vector<BodySpec> bodies;
  actuation::SolverOptions solver{};
};

inline Vec3 vec3_of(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, fmt::format("'{}' must be a 3-element array", key));
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Scenario parse_scenario(const std::string& text, const fs::path& base_dir) {
  Scenario s;
  try {
    const auto j = json::parse(text);
    s.name = j.value("name", std::string{});
    auto resolve = [&](const char* key) -> std::string {
      if (!j.contains(key)) return {};
      return (base_dir / j.at(key).get<std::string>()).string();
    };
    s.mag_path = resolve("mag");
    s.geom_path = resolve("geom");
    if (j.contains("material")) {
      const auto& m = j.at("material");
      s.material.E = m.value("E_Pa", s.material.E);
      s.material.nu = m.value("nu", s.material.nu);
    }
    if (j.contains("magnetization_A_per_m")) s.magnetization = j.at("magnetization_A_per_m").get<double>();
    if (j.contains("source")) {
      const auto& src = j.at("source");
      const auto type = src.at("type").get<std::string>();
      if (type == "uniform") {
        s.source = magnetics::Uniform{vec3_of(src.at("B_T"), "B_T")};
      } else if (type == "dipole") {
        s.source = magnetics::Dipole{vec3_of(src.at("moment_Am2"), "moment_Am2"),
                                     vec3_of(src.at("position_mm"), "position_mm")};
      } else {
        throw Error(ErrorKind::Parse, fmt::format("unknown source type '{}'", type));
      }
    }
    for (const auto& c : j.value("chains", json::array())) {
      ChainSpec spec;
      spec.name = c.value("name", fmt::format("chain{}", s.chains.size() + 1));
      spec.axis = actuation::parse_chain_axis(c.value("axis", std::string{"+x"}));
      spec.ids = c.value("ids", std::vector<VoxelId>{});
      if (c.contains("bend_axis")) spec.bend_axis = vec3_of(c.at("bend_axis"), "bend_axis");
      s.chains.push_back(spec);
    }
    for (const auto& b : j.value("bodies", json::array())) {
      BodySpec body;
      body.body.M = vec3_of(b.at("M_A_per_m"), "M_A_per_m");
      body.body.volume = b.at("volume_m3").get<double>();
      body.position = vec3_of(b.at("position_mm"), "position_mm");
      if (!(body.body.volume > 0.0)) throw Error(ErrorKind::Parse, "body volume must be positive");
      s.bodies.push_back(body);
    }
    if (j.contains("solver")) {
      s.solver.max_iterations = j.at("solver").value("max_iterations", s.solver.max_iterations);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("scenario: {}", e.what()));
  }
  if (!(s.material.E > 0.0)) throw Error(ErrorKind::Config, "scenario: material E_Pa must be positive");
  return s;
}

inline Design subset(const Design& d, const std::vector<VoxelId>& ids) {
  if (ids.empty()) return d;
  const auto index = index_by_id(d);
  Design out;
  out.name = d.name;
  for (const auto id : ids) out.voxels.push_back(lookup(index, id));
  return out;
}

/// Field, force and torque on each magnetized body, one CSV row per body.
inline std::string force_table(const std::vector<std::pair<std::string, BodySpec>>& bodies,
                               const magnetics::FieldSource& src) {
  std::string out = "body,x_mm,y_mm,z_mm,Hx_A_per_m,Hy_A_per_m,Hz_A_per_m,Fx_N,Fy_N,Fz_N,Tx_Nm,Ty_Nm,Tz_Nm\n";
  for (const auto& [label, b] : bodies) {
    const Vec3 H = magnetics::field_at(src, b.position);
    const Vec3 F = magnetics::force(b.body, src, b.position);
    const Vec3 T = magnetics::torque(b.body, H);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", label, b.position.x, b.position.y, b.position.z,
                       H.x, H.y, H.z, F.x, F.y, F.z, T.x, T.y, T.z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct Options {
  std::string mag;
  std::string geom;
  std::string config;
  std::string out{"."};
  std::string order{"hypot"};
  std::string scenario;
  std::string gcode;
  std::string name;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

inline std::string job_name(const Options& o) {
  if (!o.name.empty()) return o.name;
  if (!o.geom.empty()) return stem_of(o.geom);
  if (!o.scenario.empty()) return stem_of(o.scenario);
  return "design";
}

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorKind::Input, fmt::format("missing required option {}", flag));
}

inline int cmd_validate(const Options& o, Streams io) {
  require(o.mag, "--mag");
  require(o.geom, "--geom");
  const auto cfg = load_config(o.config);
  const auto name = job_name(o);
  const auto d = load_design(o.mag, o.geom, cfg, name);
  const auto report = validate_design(d, &cfg);
  if (!o.out.empty()) {
    write_file(fs::path(o.out) / (name + ".validation.json"), reports::validation_report(report).dump(2) + "\n");
  }
  for (const auto& e : report.entries) {
    (e.severity == Severity::Error ? io.err : io.out)
        << (e.severity == Severity::Error ? "error: " : "warning: ") << e.message << "\n";
  }
  io.out << fmt::format("{}: {} voxels, {} error(s), {} warning(s)\n", name, d.voxels.size(),
                        std::count_if(report.entries.begin(), report.entries.end(),
                                      [](const auto& e) { return e.severity == Severity::Error; }),
                        std::count_if(report.entries.begin(), report.entries.end(),
                                      [](const auto& e) { return e.severity == Severity::Warning; }));
  return report.has_errors() ? kValidation : kOk;
}

inline int cmd_slice(const Options& o, Streams io) {
  require(o.mag, "--mag");
  require(o.geom, "--geom");
  const auto cfg = load_config(o.config);
  const auto name = job_name(o);
  const auto d = load_design(o.mag, o.geom, cfg, name);
  const auto path = plan(d, cfg, parse_order(o.order));
  const auto emitted = gcode::emit(path, d, cfg);
  const fs::path dir = o.out;
  write_file(dir / (name + ".gcode"), emitted.text);
  write_file(dir / (name + ".path.json"), reports::path_report(path, d, cfg).dump(2) + "\n");
  io.out << fmt::format("voxels: {}\nlayers: {}\ntotal_xy_travel_mm: {:.6f}\n", path.size(), path.layers.size(),
                        path.total_xy_travel);
  return kOk;
}

inline int cmd_verify(const Options& o, Streams io) {
  require(o.gcode, "--gcode");
  require(o.mag, "--mag");
  require(o.geom, "--geom");
  const auto cfg = load_config(o.config);
  const auto name = o.name.empty() ? stem_of(o.gcode) : o.name;
  const auto text = read_file(o.gcode);
  const auto program = with_file(o.gcode, [&] { return gcode::parse(text); });
  const auto d = load_design(o.mag, o.geom, cfg, name);
  const auto path = plan(d, cfg, parse_order(o.order));
  const auto reconstruction = execute(program, cfg);
  const auto report = compare(d, path, reconstruction, cfg);
  write_file(fs::path(o.out) / (name + ".fidelity.json"), reports::fidelity_report(report).dump(2) + "\n");
  io.out << fmt::format("{}: {}\nmax_position_error_mm: {:.6g}\nmax_angular_error_deg: {:.6g}\n",
                        report.pass ? "PASS" : "FAIL", report.message, report.max_position_error_mm,
                        report.max_angular_error_deg);
  return report.pass ? kOk : kVerification;
}

inline int cmd_preview(const Options& o, Streams io) {
  require(o.scenario, "--scenario");
  const auto text = read_file(o.scenario);
  auto scenario = with_file(o.scenario, [&] { return parse_scenario(text, fs::path(o.scenario).parent_path()); });
  if (!o.mag.empty()) scenario.mag_path = o.mag;
  if (!o.geom.empty()) scenario.geom_path = o.geom;
  const std::string name = !o.name.empty() ? o.name : (!scenario.name.empty() ? scenario.name : stem_of(o.scenario));
  const auto cfg = load_config(o.config);
  const fs::path dir = o.out;

  json report = {{"scenario", name}};
  std::vector<std::pair<std::string, BodySpec>> bodies;
  bool validation_failed = false;

  std::optional<Design> design;
  if (!scenario.mag_path.empty() || !scenario.geom_path.empty()) {
    require(scenario.mag_path, "--mag");
    require(scenario.geom_path, "--geom");
    design = load_design(scenario.mag_path, scenario.geom_path, cfg, name);
    const auto validation = validate_design(*design, o.config.empty() ? nullptr : &cfg);
    validation_failed = validation.has_errors();
    report["voxel_count"] = design->voxels.size();
    report["validation"] = reports::validation_report(validation);
    report["adjacency"] = reports::adjacency_report(classify_adjacency(*design));
    for (const auto& e : validation.entries) {
      io.out << (e.severity == Severity::Error ? "error: " : "warning: ") << e.message << "\n";
    }
    for (const auto& v : design->voxels) {
      const double magnitude = scenario.magnetization.value_or(v.magnetization.magnitude);
      bodies.push_back({fmt::format("voxel{}", v.id),
                        {{v.magnetization.direction * magnitude, v.volume_m3()}, v.position}});
    }
  }
  for (std::size_t i = 0; i < scenario.bodies.size(); ++i) bodies.push_back({fmt::format("body{}", i + 1), scenario.bodies[i]});

  if (validation_failed) {
    write_file(dir / (name + ".preview.json"), report.dump(2) + "\n");
    io.err << "design has validation errors; skipping actuation preview\n";
    return kValidation;
  }

  json chains = json::array();
  if (!scenario.chains.empty()) {
    if (!design) throw Error(ErrorKind::Input, "scenario defines chains but no design");
    for (const auto& spec : scenario.chains) {
      const auto chain = actuation::build_chain(subset(*design, spec.ids), scenario.material, spec.axis,
                                                scenario.magnetization, spec.bend_axis);
      const auto result = actuation::solve_equilibrium(chain, scenario.source, scenario.solver);
      json entry = {{"name", spec.name}};
      entry.update(reports::equilibrium_report(chain, result));
      chains.push_back(entry);
      write_file(dir / fmt::format("{}.{}.svg", name, spec.name),
                 actuation::render_svg(chain, result, fmt::format("{} / {}", name, spec.name)));
      io.out << fmt::format("chain {}: {} joints, tip displacement {:.6g} mm, {} iterations, residual {:.3e} N*m\n",
                            spec.name, chain.joint_count(), norm(result.tip_displacement), result.iterations,
                            result.residual_norm);
    }
  }
  report["material"] = {{"E_Pa", scenario.material.E}, {"nu", scenario.material.nu}};
  report["chains"] = chains;
  if (!bodies.empty()) write_file(dir / (name + ".forces.csv"), force_table(bodies, scenario.source));
  write_file(dir / (name + ".preview.json"), report.dump(2) + "\n");
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Voxel magnetic microrobot slicer, virtual printer and actuation preview"};
  app.require_subcommand(1);
  Options o;

  auto design_flags = [&](CLI::App* sub) {
    sub->add_option("--mag", o.mag, "magnetization CSV (id,mx,my,mz)");
    sub->add_option("--geom", o.geom, "geometry CSV (id,l,w,h,x,y,z in mm)");
    sub->add_option("--config", o.config, "machine config (key = value)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--name", o.name, "job name used for output files");
  };
  auto* validate = app.add_subcommand("validate", "check a design");
  design_flags(validate);
  auto* slice = app.add_subcommand("slice", "plan the cure order and write G-code");
  design_flags(slice);
  slice->add_option("--order", o.order, "cure order within a layer")->check(CLI::IsMember({"hypot", "nn"}));
  auto* verify = app.add_subcommand("verify", "run G-code on the virtual printer and compare with the design");
  design_flags(verify);
  verify->add_option("--gcode", o.gcode, "program to execute");
  verify->add_option("--order", o.order, "cure order used when slicing")->check(CLI::IsMember({"hypot", "nn"}));
  auto* preview = app.add_subcommand("preview", "validation, adjacency and bending preview for a scenario");
  design_flags(preview);
  preview->add_option("--scenario", o.scenario, "scenario JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  Streams io{out, err};
  try {
    if (*validate) return cmd_validate(o, io);
    if (*slice) return cmd_slice(o, io);
    if (*verify) return cmd_verify(o, io);
    if (*preview) return cmd_preview(o, io);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace magvox::cli
