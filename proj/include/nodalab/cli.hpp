#pragma once

#include <string>

#include "nodalab/domain.hpp"

namespace nodalab {

/// Parses "rect:AxB" or "disk:R".
DomainSpec parse_domain(const std::string& text);

/// Potential sampled on a lattice file: a first line "nx ny h", then ny rows of
/// nx comma-separated values, anchored at the lower-left corner of the
/// domain's bounding box and interpolated bilinearly.
void load_potential_grid(DomainSpec& domain, const std::string& path);

/// Entry point of the nodalab tool. Returns 0 on success, 1 on a
/// computational failure, 2 on a configuration error.
int run_command(int argc, const char* const* argv);

}  // namespace nodalab
