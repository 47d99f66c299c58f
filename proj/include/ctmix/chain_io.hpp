#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ctmix/chain.hpp"

namespace ctmix {

// On-disk chain format:
//   {"states": ["A", ...], "rates": [[i, j, rate], ...]}
// zero-based indices, strictly positive rates, diagonal implied.
ChainSpec chain_from_json(const std::string& text,
                          ChainSpec::Connectivity conn =
                              ChainSpec::Connectivity::require_irreducible);
ChainSpec chain_from_json_file(const std::string& path,
                               ChainSpec::Connectivity conn =
                                   ChainSpec::Connectivity::require_irreducible);

nlohmann::ordered_json chain_to_json(const ChainSpec& chain);
void write_chain_json(const ChainSpec& chain, const std::string& path);

} // namespace ctmix
