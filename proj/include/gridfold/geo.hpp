#pragma once

namespace gridfold {

/// Geographic coordinate in degrees. Latitude in [-90, 90], longitude in [-180, 180].
struct GeoCoord {
    double latitude = 0.0;
    double longitude = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in km between two coordinates (haversine formula).
double haversine_distance(const GeoCoord& a, const GeoCoord& b);

bool valid_coord(const GeoCoord& c);

} // namespace gridfold
