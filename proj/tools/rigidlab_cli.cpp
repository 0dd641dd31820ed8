// Command-line front end: build fixtures, export angle curves, run the full
// verification pipeline.
//
// Exit codes: 0 all certificates pass, 2 validation error, 3 certificate
// failure, 4 I/O error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rigidlab/rigidlab.hpp"

namespace fs = std::filesystem;
using namespace rigidlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCertificate = 3;
constexpr int kExitIo = 4;

RunConfig load_run_config(const std::string& config_path) {
  RunConfig rc;
  if (!config_path.empty()) rc = load_config(config_path, rc);
  return rc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

int cmd_build(const RunConfig& rc, const std::string& target, double r_opt, int n_opt) {
  Construction con = build_construction(rc.bricard, rc.placement);
  EmbeddedPolyhedron mesh;
  std::string name = target;
  if (target == "B") {
    double r = r_opt > 0 ? r_opt : rc.bricard.s;
    mesh = build_bricard(rc.bricard, r);
  } else if (target == "C") {
    double r = r_opt > 0 ? r_opt : rc.bricard.s;
    mesh = transport_C(rc.bricard, con.blisters, r);
  } else if (target == "P") {
    mesh = con.P;
  } else if (target == "Pn") {
    int n = n_opt > 0 ? n_opt : 10;
    mesh = build_Pn(con.P, rc.bricard, n);
    name = "Pn" + std::to_string(n);
  } else {
    throw Error("unknown build target " + target + " (expected B, C, P or Pn)");
  }
  fs::create_directories(rc.out_dir);
  fs::path obj = fs::path(rc.out_dir) / (name + ".obj");
  fs::path meta = fs::path(rc.out_dir) / (name + ".json");
  write_obj(mesh, obj.string());
  write_text(meta, construction_metadata(rc, mesh).dump(2) + "\n");
  std::cout << "wrote " << obj.string() << " and " << meta.string() << "\n";
  return kExitOk;
}

int cmd_export(const RunConfig& rc, const std::string& target, int n_opt) {
  Construction con = build_construction(rc.bricard, rc.placement);
  SimplicialSurface pattern;
  std::string name = target;
  if (target == "B") pattern = con.B.surface;
  else if (target == "C") pattern = con.C.surface;
  else if (target == "P") pattern = con.P.surface;
  else if (target == "Pn") {
    int n = n_opt > 0 ? n_opt : 10;
    pattern = build_Pn(con.P, rc.bricard, n).surface;
    name = "Pn" + std::to_string(n);
  } else {
    throw Error("unknown export target " + target);
  }
  fs::create_directories(rc.out_dir);
  fs::path path = fs::path(rc.out_dir) / (name + "_pattern.json");
  write_text(path, pattern_to_json(pattern).dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_angles(const RunConfig& rc) {
  BricardConfig cfg = rc.bricard;
  cfg.validate();
  validate_alpha_minimal_at_s(cfg);
  FlexInterval iv = flex_interval(cfg);
  std::vector<double> rs, alphas, betas, gammas;
  for (int i = 0; i < rc.grid; ++i) {
    double r = (iv.s - iv.epsilon) + iv.epsilon * (i + 1) / static_cast<double>(rc.grid);
    rs.push_back(r);
    alphas.push_back(alpha(cfg, r));
    betas.push_back(beta(cfg, r));
    try {
      gammas.push_back(gamma_at_radius(cfg, rc.placement, r));
    } catch (const Error&) {
      // C not constructible at this radius: gamma column ends here
      break;
    }
  }
  fs::create_directories(rc.out_dir);
  fs::path path = fs::path(rc.out_dir) / "angles.csv";
  write_angle_csv(path.string(), rs, alphas, betas, gammas);
  std::cout << "wrote " << path.string() << " (" << rs.size() << " samples)\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& rc) {
  VerificationOutcome out = run_verification(rc);
  fs::create_directories(rc.out_dir);
  fs::path path = fs::path(rc.out_dir) / "report.json";
  write_text(path, out.report.dump(2) + "\n");
  std::cout << "report: " << path.string() << "\n";
  if (!out.all_pass()) {
    for (const auto& c : out.criteria)
      if (!c.pass) {
        std::cout << "first failing criterion: " << c.id << " (" << c.name << ")\n";
        return kExitCertificate;
      }
  }
  std::cout << "all certificates pass\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigidlab: flexible/rigid polyhedron laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  double r_val = -1, tol = -1;
  int n_val = -1, grid = -1;
  app.add_option("--config", config_path, "flat key-value config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--r", r_val, "radius parameter for build targets");
  app.add_option("--n", n_val, "index n for the P_n family");
  app.add_option("--grid", grid, "sample count for curves and paths");
  app.add_option("--tol", tol, "reporting tolerance");

  std::string build_target = "P", export_target = "P";
  auto* sb = app.add_subcommand("build", "write an OBJ mesh plus JSON metadata");
  sb->add_option("target", build_target, "B | C | P | Pn");
  sb->fallthrough();
  auto* sa = app.add_subcommand("angles", "write the angle curve CSV (r,alpha,beta,gamma)");
  sa->fallthrough();
  auto* sv = app.add_subcommand("verify", "run the full certificate pipeline");
  sv->fallthrough();
  auto* se = app.add_subcommand("export", "write a surface pattern JSON");
  se->add_option("target", export_target, "B | C | P | Pn");
  se->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc = load_run_config(config_path);
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (grid > 0) rc.grid = grid;
    if (tol > 0) rc.tol = tol;
    try {
      rc.validate();
    } catch (const Error& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      return kExitValidation;
    }
    if (sb->parsed()) return cmd_build(rc, build_target, r_val, n_val);
    if (sa->parsed()) return cmd_angles(rc);
    if (sv->parsed()) return cmd_verify(rc);
    if (se->parsed()) return cmd_export(rc, export_target, n_val);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    bool io = msg.find("cannot open") != std::string::npos ||
              msg.find("write failed") != std::string::npos;
    bool validation = msg.find("BricardConfig") != std::string::npos ||
                      msg.find("AuxPlacement") != std::string::npos ||
                      msg.find("RunConfig") != std::string::npos ||
                      msg.find("config line") != std::string::npos ||
                      msg.find("diminish k") != std::string::npos ||
                      msg.find("unknown") != std::string::npos;
    return io ? kExitIo : (validation ? kExitValidation : kExitCertificate);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCertificate;
  }
  return kExitOk;
}
