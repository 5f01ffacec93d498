#pragma once

// Compiles a sequence of gate layers (site patterns with gate durations)
// into a timed control schedule.
//
// Configuration 1 packs layers into SLM frames of partitions_x *
// partitions_y patches. Every frame costs one full SLM load (1/r_slm),
// every patch use one deflector settle of T_burst. Configuration 2 never
// reloads the SLM: each layer is canonicalized, looked up in the patch
// catalog, and costs one settle of T_transition; multi-tone layers fan out
// into parallel gate sub-windows with distinct frequency offsets.
//
// Event start times are composed from closed-form terms
// (frames/r_slm + settles*T + accumulated gate time) rather than by
// running accumulation, so schedule totals match the design equations
// exactly.

#include <scankit/geometry.hpp>
#include <scankit/partitions.hpp>
#include <scankit/tones.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scankit::scheduler {

using partitions::AddressPattern;
using partitions::Offset;
using partitions::Site;

/// Multi-tone replication request: tones_x * tones_y replicas on a grid of
/// `pitch_sites` site spacings.
struct ToneReplication {
  int tones_x = 1;
  int tones_y = 1;
  int pitch_sites = 1;
};

struct GateLayer {
  std::int64_t id = 0;
  AddressPattern pattern;
  double gate_duration = 0;  // [s]
  std::optional<ToneReplication> tones;
};

enum class EventKind { slm_frame_load, aod_settle, gate_window };

struct Event {
  double start = 0;     // [s]
  double duration = 0;  // [s]
  EventKind kind = EventKind::gate_window;
  std::int64_t layer_id = -1;      // -1 for frame loads
  int frame_index = -1;            // config 1
  int patch_index = -1;            // slot in frame (c1) / catalog index (c2)
  Offset offset{0, 0};             // sub-array placement (c2)
  int replica_index = -1;          // gate sub-window index for multi-tone layers
  double frequency_x_hz = 0;       // per-axis tone pair identifying the beam
  double frequency_y_hz = 0;
  double frequency_offset_hz = 0;  // f_x + f_y, offset from the nominal carrier
};

struct Timeline {
  std::vector<Event> events;
  double total_time = 0;  // [s]
  int frame_count = 0;    // SLM frame loads (0 for config 2)
};

class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a layer's canonical pattern has no catalog patch.
class catalog_miss_error : public std::runtime_error {
 public:
  explicit catalog_miss_error(const AddressPattern& canonical)
      : std::runtime_error("no catalog patch for canonical pattern " + canonical.to_string()),
        canonical(canonical) {}
  AddressPattern canonical;
};

/// Canonicalizes a layer pattern and checks it fits a sub_m x sub_n
/// sub-array window.
inline std::pair<AddressPattern, Offset> decompose_layer(const AddressPattern& pattern,
                                                         int sub_m, int sub_n) {
  if (sub_m < 1 || sub_n < 1) throw std::domain_error("sub-array dimensions must be >= 1");
  auto [canonical, offset] = partitions::canonicalize(pattern);
  const Site extent = canonical.max_corner();
  if (extent.row >= sub_m || extent.col >= sub_n)
    throw std::domain_error("pattern not addressable by sub-array: spans " +
                            std::to_string(extent.row + 1) + "x" + std::to_string(extent.col + 1) +
                            " but sub-array is " + std::to_string(sub_m) + "x" +
                            std::to_string(sub_n));
  return {std::move(canonical), offset};
}

inline Timeline compile_config1(std::span<const GateLayer> layers,
                                const geometry::ScannerParams& params) {
  if (layers.empty()) throw std::domain_error("compile_config1: no layers");
  const geometry::Config1Report report = geometry::config1_report(params);
  const int per_frame = params.partitions_x * params.partitions_y;
  const double frame_time = 1.0 / params.r_slm;
  const double t_burst = report.burst_time;

  for (const GateLayer& layer : layers) {
    if (layer.tones)
      throw std::domain_error("tone replication requires configuration 2");
    const Site hi = layer.pattern.max_corner();
    const Site lo = layer.pattern.min_corner();
    if (lo.row < 0 || lo.col < 0 || hi.row >= report.n_q_max || hi.col >= report.n_q_max)
      throw capacity_error("layer " + std::to_string(layer.id) + " exceeds the " +
                           std::to_string(report.n_q_max) + "x" +
                           std::to_string(report.n_q_max) + " addressable array");
  }

  Timeline tl;
  tl.frame_count = static_cast<int>((layers.size() + per_frame - 1) / per_frame);
  double gate_prefix = 0;  // accumulated gate time, in arrival order
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const GateLayer& layer = layers[i];
    const int frame = static_cast<int>(i) / per_frame;
    const int slot = static_cast<int>(i) % per_frame;
    const double settles_before = static_cast<double>(i) * t_burst;
    if (slot == 0) {
      Event load;
      load.start = frame / params.r_slm + settles_before + gate_prefix;
      load.duration = frame_time;
      load.kind = EventKind::slm_frame_load;
      load.frame_index = frame;
      tl.events.push_back(load);
    }
    Event settle;
    settle.start = (frame + 1) / params.r_slm + settles_before + gate_prefix;
    settle.duration = t_burst;
    settle.kind = EventKind::aod_settle;
    settle.layer_id = layer.id;
    settle.frame_index = frame;
    settle.patch_index = slot;
    tl.events.push_back(settle);

    Event gate;
    gate.start = (frame + 1) / params.r_slm + static_cast<double>(i + 1) * t_burst + gate_prefix;
    gate.duration = layer.gate_duration;
    gate.kind = EventKind::gate_window;
    gate.layer_id = layer.id;
    gate.frame_index = frame;
    gate.patch_index = slot;
    tl.events.push_back(gate);
    gate_prefix += layer.gate_duration;
  }
  tl.total_time = tl.frame_count / params.r_slm +
                  static_cast<double>(layers.size()) * t_burst + gate_prefix;
  return tl;
}

inline Timeline compile_config2(std::span<const GateLayer> layers,
                                const partitions::PatchCatalog& catalog,
                                const geometry::ScannerParams& params, int sub_m, int sub_n) {
  if (layers.empty()) throw std::domain_error("compile_config2: no layers");
  geometry::validate(params);
  if (!params.has_q_aod_c()) throw std::invalid_argument("invalid value for key: q_aod_c");
  const int sub_max = sub_m > sub_n ? sub_m : sub_n;
  const auto [t_transition, limiter] = geometry::transition_time_c2(
      params.t_aod, params.q_a, sub_max, params.q_aod_a, params.t_aod, params.q_aod_c);
  (void)limiter;
  const int n_q =
      geometry::usable_count(geometry::addressable_array_c2(params.q_aod_c, params.q_a, params.tbw));
  // Hz of acoustic frequency per site step of the positioning deflector.
  const double hz_per_site = n_q > 0 ? params.tbw / (params.t_aod * n_q) : 0.0;

  Timeline tl;
  tl.frame_count = 0;
  double gate_prefix = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const GateLayer& layer = layers[i];
    auto [canonical, offset] = decompose_layer(layer.pattern, sub_m, sub_n);
    const int patch = catalog.find(canonical);
    if (patch < 0) throw catalog_miss_error(canonical);

    Event settle;
    settle.start = static_cast<double>(i) * t_transition + gate_prefix;
    settle.duration = t_transition;
    settle.kind = EventKind::aod_settle;
    settle.layer_id = layer.id;
    settle.patch_index = patch;
    settle.offset = offset;
    tl.events.push_back(settle);

    std::vector<optics::ToneReplica> replicas;
    if (layer.tones) {
      const ToneReplication& t = *layer.tones;
      if (t.tones_x < 1 || t.tones_y < 1 || t.pitch_sites < 1)
        throw std::domain_error("layer " + std::to_string(layer.id) + ": malformed tones");
      std::vector<optics::Tone> tx(t.tones_x), ty(t.tones_y);
      for (int a = 0; a < t.tones_x; ++a)
        tx[a] = {a * t.pitch_sites, a * t.pitch_sites * hz_per_site};
      for (int b = 0; b < t.tones_y; ++b)
        ty[b] = {b * t.pitch_sites, b * t.pitch_sites * hz_per_site};
      replicas = optics::multi_tone_replicate(tx, ty, canonical);
    } else {
      replicas = {optics::ToneReplica{{0, 0}, 0.0, 0.0, 0.0}};
    }
    const double gate_start = static_cast<double>(i + 1) * t_transition + gate_prefix;
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      Event gate;
      gate.start = gate_start;
      gate.duration = layer.gate_duration;
      gate.kind = EventKind::gate_window;
      gate.layer_id = layer.id;
      gate.patch_index = patch;
      gate.offset = Offset{offset.row + replicas[r].site_offset.row,
                           offset.col + replicas[r].site_offset.col};
      gate.replica_index = static_cast<int>(r);
      gate.frequency_x_hz = replicas[r].frequency_x_hz;
      gate.frequency_y_hz = replicas[r].frequency_y_hz;
      gate.frequency_offset_hz = replicas[r].frequency_shift_hz;
      tl.events.push_back(gate);
    }
    gate_prefix += layer.gate_duration;
  }
  tl.total_time = static_cast<double>(layers.size()) * t_transition + gate_prefix;
  return tl;
}

/// Net beam frequency offsets of one gate window group (the sub-windows
/// sharing a settle event).
struct WindowBudget {
  std::int64_t layer_id = 0;
  std::vector<double> net_offsets_hz;  // per beam, after compensation
  double max_abs_hz = 0;
};

/// Subtracts the AOM compensation from every beam offset. The compensation
/// is the total shift the double-passed AOM applies (its drive frequency
/// counts twice).
inline std::vector<WindowBudget> frequency_budget(const Timeline& tl, double compensation_hz) {
  std::vector<WindowBudget> budgets;
  for (const Event& e : tl.events) {
    if (e.kind != EventKind::gate_window) continue;
    if (e.replica_index <= 0) {
      budgets.push_back(WindowBudget{e.layer_id, {}, 0});
    }
    WindowBudget& w = budgets.back();
    const double net = e.frequency_offset_hz - compensation_hz;
    w.net_offsets_hz.push_back(net);
    w.max_abs_hz = std::max(w.max_abs_hz, std::abs(net));
  }
  return budgets;
}

// ---------------------------------------------------------------------------
// Layer file format: one layer per line,
//   layer <id>; sites (r,c) (r,c)...; duration <seconds>[; tones <nx>x<ny>@<pitch>]
// Blank lines and lines starting with '#' are skipped.

inline std::vector<GateLayer> parse_layers(std::istream& is) {
  std::vector<GateLayer> layers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("layers line " + std::to_string(line_no) + ": " + what);
    };
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t semi = line.find(';', pos);
      fields.push_back(line.substr(pos, semi == std::string::npos ? semi : semi - pos));
      if (semi == std::string::npos) break;
      pos = semi + 1;
    }
    if (fields.size() < 3) fail("expected 'layer <id>; sites ...; duration <s>'");
    GateLayer layer;
    {
      std::istringstream fs(fields[0]);
      std::string kw;
      if (!(fs >> kw >> layer.id) || kw != "layer") fail("malformed layer id");
    }
    {
      std::istringstream fs(fields[1]);
      std::string kw;
      if (!(fs >> kw) || kw != "sites") fail("malformed sites field");
      std::vector<Site> sites;
      try {
        sites = partitions::detail::parse_site_list(fs);
        layer.pattern = AddressPattern::from(std::move(sites));
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
    {
      std::istringstream fs(fields[2]);
      std::string kw;
      if (!(fs >> kw >> layer.gate_duration) || kw != "duration" || layer.gate_duration < 0)
        fail("malformed duration");
    }
    if (fields.size() > 3) {
      std::istringstream fs(fields[3]);
      std::string kw;
      ToneReplication t;
      char x, at;
      if (!(fs >> kw >> t.tones_x >> x >> t.tones_y >> at >> t.pitch_sites) || kw != "tones" ||
          x != 'x' || at != '@' || t.tones_x < 1 || t.tones_y < 1 || t.pitch_sites < 1)
        fail("malformed tones");
      layer.tones = t;
    }
    if (fields.size() > 4) fail("unexpected trailing fields");
    layers.push_back(std::move(layer));
  }
  return layers;
}

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::slm_frame_load: return "slm_frame_load";
    case EventKind::aod_settle: return "aod_settle";
    default: return "gate_window";
  }
}

/// CSV timeline: start_s,duration_s,kind,payload followed by a '#' summary
/// block (total time, average gate rate, frame count).
inline void write_timeline_csv(std::ostream& os, const Timeline& tl) {
  os << "start_s,duration_s,kind,payload\n";
  char buf[256];
  for (const Event& e : tl.events) {
    std::string payload;
    switch (e.kind) {
      case EventKind::slm_frame_load:
        payload = "frame=" + std::to_string(e.frame_index);
        break;
      case EventKind::aod_settle:
        payload = "layer=" + std::to_string(e.layer_id) + " patch=" + std::to_string(e.patch_index);
        if (e.frame_index >= 0) payload += " frame=" + std::to_string(e.frame_index);
        else
          payload += " offset=(" + std::to_string(e.offset.row) + "," +
                     std::to_string(e.offset.col) + ")";
        break;
      case EventKind::gate_window:
        payload = "layer=" + std::to_string(e.layer_id);
        if (e.replica_index >= 0) {
          std::snprintf(buf, sizeof buf, " replica=%d offset=(%d,%d) freq_x_hz=%.9g freq_y_hz=%.9g",
                        e.replica_index, e.offset.row, e.offset.col, e.frequency_x_hz,
                        e.frequency_y_hz);
          payload += buf;
        }
        break;
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,", e.start, e.duration, to_string(e.kind));
    os << buf << payload << '\n';
  }
  std::size_t layer_count = 0;
  for (const Event& e : tl.events)
    if (e.kind == EventKind::aod_settle) ++layer_count;
  std::snprintf(buf, sizeof buf, "# total_time_s=%.17g\n", tl.total_time);
  os << buf;
  if (tl.total_time > 0) {
    std::snprintf(buf, sizeof buf, "# average_rate_hz=%.9g\n",
                  static_cast<double>(layer_count) / tl.total_time);
    os << buf;
  }
  os << "# frames=" << tl.frame_count << '\n';
}

/// Structural checks used by tests: events ordered, non-overlapping on the
/// serialized control channel (parallel replicas share one window), total
/// matching the last event end.
inline bool validate(const Timeline& tl) {
  double cursor = 0;
  double window_end = 0;
  double last_end = 0;
  for (const Event& e : tl.events) {
    if (e.kind == EventKind::gate_window && e.replica_index > 0) {
      if (e.start + e.duration > window_end + 1e-15) return false;
      continue;
    }
    if (e.start + 1e-12 < cursor) return false;
    cursor = e.start + e.duration;
    window_end = cursor;
    last_end = std::max(last_end, cursor);
  }
  return std::abs(last_end - tl.total_time) <= 1e-9 * std::max(1.0, tl.total_time);
}

}  // namespace scankit::scheduler
