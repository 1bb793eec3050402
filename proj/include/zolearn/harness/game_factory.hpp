#pragma once

#include <string>
#include <vector>

#include "zolearn/game.hpp"
#include "zolearn/harness/config.hpp"

namespace zolearn::harness {

// Game kinds: random-quadratic, quadratic, portfolio, lse, thermal. Every
// numeric parameter is either explicit in the table or derived from
// `seed` by labeled stream splits.
std::vector<std::string> game_kinds();

// Checks the kind and rejects keys the kind does not understand.
void validate_game_spec(const ConfigTable& game);

Game build_game(const ConfigTable& game);

}  // namespace zolearn::harness
