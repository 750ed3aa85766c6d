#pragma once

#include "pgmcts/samegame/board.hpp"
#include "pgmcts/samegame/encoding.hpp"
#include "pgmcts/samegame/position_file.hpp"
#include "pgmcts/samegame/rules.hpp"
