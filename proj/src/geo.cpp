#include "gridfold/geo.hpp"

#include <algorithm>
#include <cmath>

namespace gridfold {

namespace {
constexpr double kPi = 3.14159265358979323846;

double to_rad(double deg) { return deg * kPi / 180.0; }
} // namespace

double haversine_distance(const GeoCoord& a, const GeoCoord& b) {
    const double dlat = to_rad(b.latitude - a.latitude);
    const double dlon = to_rad(b.longitude - a.longitude);
    const double lat1 = to_rad(a.latitude);
    const double lat2 = to_rad(b.latitude);

    const double sin_lat = std::sin(dlat / 2.0);
    const double sin_lon = std::sin(dlon / 2.0);
    double h = sin_lat * sin_lat + sin_lon * sin_lon * std::cos(lat1) * std::cos(lat2);
    // Guard against rounding pushing h out of [0, 1].
    h = std::clamp(h, 0.0, 1.0);
    const double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
    return kEarthRadiusKm * c;
}

bool valid_coord(const GeoCoord& c) {
    return std::isfinite(c.latitude) && std::isfinite(c.longitude) &&
           c.latitude >= -90.0 && c.latitude <= 90.0 &&
           c.longitude >= -180.0 && c.longitude <= 180.0;
}

} // namespace gridfold
