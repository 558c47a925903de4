#pragma once

// Values recorded with tests/oracle/laea_golden.py (system PROJ, EPSG:4326 -> EPSG:3035) before the build.
namespace fixtures {

struct LaeaGolden {
  double lat, lon, easting, northing;
};
inline constexpr LaeaGolden kAachen{50.7753, 6.0839, 4044915.7862, 3081133.8608};
inline constexpr LaeaGolden kCenter{52.0, 10.0, 4321000.0, 3210000.0};

struct InverseGolden {
  double easting, northing, lat, lon;
};
inline constexpr InverseGolden kInverse[] = {
    {4029700, 3090500, 50.851825683715, 5.861024381400},
    {4029800, 3090500, 50.851876497336, 5.862442477861},
    {4029700, 3090600, 50.852722964397, 5.860944597750},
    {4029800, 3090600, 50.852773779143, 5.862362721397},
    {4321100, 3210100, 52.000898724545, 10.001456099151},
};

// Cell CRS3035RES100mN3090500E4029700: min/max over the first four corners above.
inline constexpr double kAachenCellSouth = 50.851825683715;
inline constexpr double kAachenCellNorth = 50.852773779143;
inline constexpr double kAachenCellWest = 5.860944597750;
inline constexpr double kAachenCellEast = 5.862442477861;

}  // namespace fixtures
