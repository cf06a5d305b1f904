#pragma once

#include "triphoton/witness.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace triphoton {

/// FNV-1a over the canonical config text; embedded in every result file so
/// outputs are traceable to the exact inputs.
std::uint64_t fnv1a64(std::string_view data);
std::string manifest_hash_hex(std::string_view canonical_config);

struct Provenance {
    std::string manifest_hash;
    std::uint64_t seed = 0;
};

void write_moment_set_json(const std::string& path, const MomentSet& m, const Provenance& prov,
                           const WitnessResult* witness = nullptr);
MomentSet read_moment_set_json(const std::string& path);

/// Fixed-format double ("%.12g") so identical runs emit byte-identical files.
std::string format_double(double v);

}  // namespace triphoton
