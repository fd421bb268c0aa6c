#pragma once

#include "symdyn/error.hpp"
#include "symdyn/symbolic.hpp"
#include "symdyn/sft.hpp"
#include "symdyn/tower.hpp"
#include "symdyn/block_construction.hpp"
#include "symdyn/gf2.hpp"
#include "symdyn/group_shift.hpp"
#include "symdyn/laurent.hpp"
#include "symdyn/l1_inverse.hpp"
#include "symdyn/shadowing.hpp"
#include "symdyn/json_io.hpp"
#include "symdyn/cli.hpp"
