#pragma once

#include "gridfold/network.hpp"

#include <filesystem>

namespace gridfold {

/// Parses and validates a network file. Throws Error with field context on
/// parse failures and with the full violation list on validation failures.
Network load_network(const std::filesystem::path& path);

/// Deterministic serialization; load_network(save_network(n)) == n.
void save_network(const Network& net, const std::filesystem::path& path);

Network network_from_json_text(const std::string& text, const std::string& origin);
std::string network_to_json_text(const Network& net);

} // namespace gridfold
