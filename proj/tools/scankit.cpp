// scankit: design reports, pattern catalogs, hologram simulations and
// control schedules for hybrid deflector + SLM scanners.
//
// Exit codes: 0 success, 1 computation/runtime error, 2 usage or
// configuration error.

#include <scankit/config.hpp>
#include <scankit/geometry.hpp>
#include <scankit/hologram.hpp>
#include <scankit/partitions.hpp>
#include <scankit/scheduler.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using scankit::config::config_error;
using scankit::config::ToolConfig;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

ToolConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) throw config_error("missing --config");
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config: " + path);
  ToolConfig cfg = scankit::config::parse(is);
  for (const std::string& entry : overrides) {
    const auto eq = entry.find('=');
    const auto dot = entry.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw config_error("malformed --set (expected section.key=value): " + entry);
    scankit::config::apply_entry(cfg, entry.substr(0, dot), entry.substr(dot + 1, eq - dot - 1),
                                 entry.substr(eq + 1));
  }
  try {
    scankit::geometry::validate(cfg.scanner);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  return cfg;
}

scankit::partitions::AddressPattern parse_sites(const std::string& text) {
  std::istringstream is(text);
  try {
    return scankit::partitions::AddressPattern::from(
        scankit::partitions::detail::parse_site_list(is));
  } catch (const std::exception& e) {
    throw config_error(std::string("bad --sites: ") + e.what());
  }
}

fs::path resolve_out(const ToolConfig& cfg, const std::string& out_flag,
                     const char* default_name) {
  if (!out_flag.empty()) return out_flag;
  return fs::path(cfg.out_dir) / default_name;
}

std::string design_report(const ToolConfig& cfg, const std::string& mode, int sub_m, int sub_n) {
  namespace geo = scankit::geometry;
  std::ostringstream os;
  if (mode == "c1") {
    const geo::Config1Report r = geo::config1_report(cfg.scanner);
    const double l_slm = geo::pixels_per_patch(cfg.scanner) * cfg.slm_pixel_pitch;
    const double w_a = geo::waist_at_atoms(cfg.scanner.focal_length, cfg.scanner.wavelength,
                                           cfg.scanner.q_slm, l_slm);
    const double w_lens = geo::lens_waist(cfg.scanner.focal_length, cfg.scanner.wavelength, w_a);
    const double d_max = geo::max_displacement(cfg.scanner.q_slm, w_lens,
                                               cfg.scanner.partitions_x, cfg.scanner.partitions_y);
    os << "mode = c1\n";
    os << "partitions = " << cfg.scanner.partitions_x << "x" << cfg.scanner.partitions_y << '\n';
    os << "pixels_per_patch = " << geo::pixels_per_patch(cfg.scanner) << '\n';
    os << "n_resolvable = " << fmt(r.n_resolvable) << '\n';
    os << "max_partitions_per_axis = " << r.max_partitions_per_axis << '\n';
    os << "n_q_max = " << r.n_q_max << '\n';
    os << "w_a_m = " << fmt(w_a) << '\n';
    os << "w_lens_m = " << fmt(w_lens) << '\n';
    os << "d_max_m = " << fmt(d_max) << '\n';
    os << "burst_time_s = " << fmt(r.burst_time) << '\n';
    os << "burst_rate_hz = " << fmt(r.burst_rate) << '\n';
    os << "average_time_s = " << fmt(r.average_time) << '\n';
    os << "average_rate_hz = " << fmt(r.average_rate) << '\n';
    os << "aperture_ok = " << (r.aperture_ok ? "true" : "false") << '\n';
  } else {
    const geo::Config2Report r = geo::config2_report(cfg.scanner, sub_m, sub_n);
    os << "mode = c2\n";
    os << "sub_array = " << sub_m << "x" << sub_n << '\n';
    os << "n_q = " << r.n_q << '\n';
    os << "transition_time_s = " << fmt(r.transition_time) << '\n';
    os << "transition_rate_hz = " << fmt(r.transition_rate) << '\n';
    os << "limiting_deflector = "
       << (r.limiting_deflector == geo::Deflector::aod_b ? "aod_b" : "aod_c") << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid deflector + SLM scanner design and simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_flag, mode = "c1";
  long seed = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "configuration file")->expected(1);
  app.add_option("--out", out_flag, "output path");
  app.add_option("--mode", mode, "scanner configuration")->check(CLI::IsMember({"c1", "c2"}));
  app.add_option("--seed", seed, "reserved; current computations are deterministic");
  app.add_option("--set", overrides, "override a config entry, section.key=value");

  app.fallthrough();
  int sub_m = 3, sub_n = 3, k_max = 2;
  auto* design = app.add_subcommand("design", "evaluate the scanner design equations");
  design->add_option("--sub-m", sub_m, "sub-array rows (c2)");
  design->add_option("--sub-n", sub_n, "sub-array columns (c2)");

  int cat_m = 0, cat_n = 0, cat_k = 0;
  std::uint64_t cat_available = UINT64_MAX;
  auto* partitions_cmd = app.add_subcommand("partitions", "enumerate the SLM patch catalog");
  partitions_cmd->add_option("m", cat_m, "sub-array rows")->required();
  partitions_cmd->add_option("n", cat_n, "sub-array columns")->required();
  partitions_cmd->add_option("k_max", cat_k, "max simultaneous sites")->required();
  partitions_cmd->add_option("--available", cat_available, "available SLM partitions");

  int holo_pixels = 0;
  std::string holo_sites = "(3,3)";
  std::string dump_phase, dump_intensity;
  auto* holo = app.add_subcommand("holo", "simulate one hologram and report metrics");
  holo->add_option("--pixels", holo_pixels, "patch pixels per axis (default from config)");
  holo->add_option("--sites", holo_sites, "targeted sites, e.g. \"(0,0) (3,3)\"");
  holo->add_option("--dump-phase", dump_phase, "write the mask as a 16-bit PGM");
  holo->add_option("--dump-intensity", dump_intensity, "write the output intensity as a 16-bit PGM");

  std::vector<int> sweep_pixels = {16, 32, 48, 64, 80};
  int sweep_max_targets = 4;
  auto* sweep = app.add_subcommand("sweep", "sweep patch pixel counts and target counts");
  sweep->add_option("--pixels", sweep_pixels, "patch pixel counts");
  sweep->add_option("--max-targets", sweep_max_targets, "sweep 1..N simultaneous targets");

  std::string layers_path;
  auto* schedule = app.add_subcommand("schedule", "compile gate layers into a timed schedule");
  schedule->add_option("--layers", layers_path, "gate layer file")->required();
  schedule->add_option("--sub-m", sub_m, "sub-array rows (c2)");
  schedule->add_option("--sub-n", sub_n, "sub-array columns (c2)");
  schedule->add_option("--k-max", k_max, "catalog depth (c2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (design->parsed()) {
      const ToolConfig cfg = load_config(config_path, overrides);
      if (sub_m < 1 || sub_n < 1) throw config_error("sub-array dimensions must be >= 1");
      if (mode == "c2" && !cfg.scanner.has_q_aod_c()) throw config_error("missing key: q_aod_c");
      const std::string report = design_report(cfg, mode, sub_m, sub_n);
      std::cout << report;
      if (!out_flag.empty()) write_file_atomic(out_flag, report);
    } else if (partitions_cmd->parsed()) {
      if (cat_m < 1 || cat_n < 1) throw config_error("m and n must be >= 1");
      if (cat_k < 1 || static_cast<std::int64_t>(cat_k) > std::int64_t(cat_m) * cat_n)
        throw config_error("k_max must be in [1, m*n]");
      const auto catalog = scankit::partitions::build_catalog(cat_m, cat_n, cat_k, cat_available);
      std::cout << catalog.size() << '\n';
      if (!out_flag.empty()) {
        std::ostringstream os;
        scankit::partitions::write_catalog(os, catalog);
        write_file_atomic(out_flag, os.str());
      }
    } else if (holo->parsed()) {
      const ToolConfig cfg = load_config(config_path, overrides);
      const scankit::optics::Protocol proto = scankit::config::to_protocol(cfg);
      const int pixels = holo_pixels > 0 ? holo_pixels : cfg.patch_pixels;
      const auto sites = parse_sites(holo_sites);
      auto inst = scankit::optics::prepare_instance(proto, pixels, sites);
      const auto mask =
          scankit::optics::quantize_phase(inst.raw_phases, pixels, proto.sim_per_slm, proto.bits);
      if (!dump_phase.empty()) scankit::optics::write_phase_pgm(mask, dump_phase);
      const auto metrics =
          scankit::optics::propagate_and_measure(inst.input, mask, inst.spec, proto.lens);
      if (!dump_intensity.empty()) {
        scankit::optics::FieldGrid out = inst.input;
        scankit::optics::apply_mask(out, mask);
        out = scankit::optics::lens_fourier(std::move(out), proto.lens);
        scankit::optics::write_intensity_pgm(out, dump_intensity);
      }
      std::vector<scankit::optics::SweepRow> rows{
          {pixels, sites.size(), proto.shape, metrics}};
      std::ostringstream os;
      scankit::optics::write_sweep_csv(os, rows);
      write_file_atomic(resolve_out(cfg, out_flag, "holo.csv"), os.str());
      std::cout << "pixels=" << pixels << " targets=" << sites.size()
                << " efficiency=" << fmt(metrics.efficiency)
                << " accuracy=" << fmt(metrics.accuracy)
                << " crosstalk=" << fmt(metrics.crosstalk_fraction) << '\n';
    } else if (sweep->parsed()) {
      const ToolConfig cfg = load_config(config_path, overrides);
      const scankit::optics::Protocol proto = scankit::config::to_protocol(cfg);
      if (sweep_max_targets < 1 || sweep_max_targets > 4)
        throw config_error("--max-targets must be in [1,4]");
      for (int px : sweep_pixels)
        if (px < 1) throw config_error("--pixels entries must be >= 1");
      std::vector<int> targets;
      for (int k = 1; k <= sweep_max_targets; ++k) targets.push_back(k);
      const auto rows = scankit::optics::sweep_pixels(proto, sweep_pixels, targets);
      std::ostringstream os;
      scankit::optics::write_sweep_csv(os, rows);
      const fs::path out = resolve_out(cfg, out_flag, "sweep.csv");
      write_file_atomic(out, os.str());
      std::cout << "wrote " << rows.size() << " rows to " << out.string() << '\n';
    } else if (schedule->parsed()) {
      const ToolConfig cfg = load_config(config_path, overrides);
      std::ifstream is(layers_path);
      if (!is) throw std::runtime_error("cannot open layers: " + layers_path);
      const auto layers = scankit::scheduler::parse_layers(is);
      scankit::scheduler::Timeline tl;
      if (mode == "c1") {
        tl = scankit::scheduler::compile_config1(layers, cfg.scanner);
      } else {
        if (k_max < 1) throw config_error("--k-max must be >= 1");
        if (sub_m < 1 || sub_n < 1) throw config_error("sub-array dimensions must be >= 1");
        if (!cfg.scanner.has_q_aod_c()) throw config_error("missing key: q_aod_c");
        const std::uint64_t available =
            std::uint64_t(cfg.scanner.partitions_x) * cfg.scanner.partitions_y;
        const auto catalog = scankit::partitions::build_catalog(sub_m, sub_n, k_max, available);
        tl = scankit::scheduler::compile_config2(layers, catalog, cfg.scanner, sub_m, sub_n);
      }
      std::ostringstream os;
      scankit::scheduler::write_timeline_csv(os, tl);
      const fs::path out = resolve_out(cfg, out_flag, "timeline.csv");
      write_file_atomic(out, os.str());
      std::cout << "layers=" << layers.size() << " events=" << tl.events.size()
                << " frames=" << tl.frame_count << " total_s=" << fmt(tl.total_time) << '\n';
    }
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
