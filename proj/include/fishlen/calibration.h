#pragma once

#include <string>

#include "fishlen/geometry.h"

namespace fishlen {

/// Two flat-port cameras behind one aquarium pane. The rig frame is the left
/// camera frame by convention, but any pose is accepted.
struct StereoRig {
  FlatPortCamera left;
  FlatPortCamera right;
  /// Water depth beyond the pane covered by the scene; default far limit of
  /// epipolar curves.
  double tank_depth_mm = 0.0;
};

/// Reads a rig calibration file. Schema:
///
///   {
///     "schema_version": 1,
///     "tank_depth_mm": 300.0,
///     "port": {"n_air": 1.0, "n_glass": 1.5, "n_water": 1.33,
///              "t_glass_mm": 5.0, "normal": [0, 0, 1],
///              "d_glass_mm": {"left": 40.0, "right": 40.0}},
///     "cameras": {
///       "left":  {"fx":..., "fy":..., "cx":..., "cy":..., "width":..., "height":...,
///                 "k1": 0.0, "k2": 0.0,
///                 "rotation": [9 reals, row-major], "translation": [3 reals, mm]},
///       "right": {...}
///     }
///   }
///
/// t_glass_mm has no default. Rotations within 1e-6 of orthonormal are
/// re-orthonormalized to absorb decimal round-off.
StereoRig LoadRig(const std::string& path);
StereoRig ParseRig(const std::string& json_text);

std::string SerializeRig(const StereoRig& rig);
void SaveRig(const StereoRig& rig, const std::string& path);

}  // namespace fishlen
