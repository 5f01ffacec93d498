#pragma once

// Multi-tone operation of the positioning deflector: driving the x and y
// axes with several acoustic frequencies replicates the addressed pattern
// as the full cross product of the tones. Every replica inherits the summed
// frequency shift of its tone pair, which matters when the beams drive
// resonant transitions.

#include <scankit/partitions.hpp>

#include <span>
#include <vector>

namespace scankit::optics {

/// One acoustic drive tone: the site displacement it produces along its
/// axis and its frequency relative to the nominal (compensated) carrier.
struct Tone {
  int displacement_sites = 0;
  double frequency_hz = 0;
};

/// One replica of the base pattern, identified by its tone combination.
struct ToneReplica {
  partitions::Offset site_offset;  // summed (row, col) displacement in sites
  double frequency_x_hz = 0;       // x-axis tone
  double frequency_y_hz = 0;       // y-axis tone
  double frequency_shift_hz = 0;   // f_x + f_y, the optical shift of the beam
};

/// Cross product of x and y tones. x tones displace columns, y tones rows;
/// the base pattern itself is reproduced at each replica offset.
inline std::vector<ToneReplica> multi_tone_replicate(std::span<const Tone> tones_x,
                                                     std::span<const Tone> tones_y,
                                                     const partitions::AddressPattern& base) {
  if (tones_x.empty() || tones_y.empty())
    throw std::domain_error("multi_tone_replicate: tone lists must be non-empty");
  (void)base;  // replicas are translates of the base; only offsets are returned
  std::vector<ToneReplica> replicas;
  replicas.reserve(tones_x.size() * tones_y.size());
  for (const Tone& tx : tones_x)
    for (const Tone& ty : tones_y)
      replicas.push_back(ToneReplica{
          partitions::Offset{ty.displacement_sites, tx.displacement_sites},
          tx.frequency_hz, ty.frequency_hz, tx.frequency_hz + ty.frequency_hz});
  return replicas;
}

}  // namespace scankit::optics
