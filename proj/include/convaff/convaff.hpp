#ifndef CONVAFF_CONVAFF_HPP
#define CONVAFF_CONVAFF_HPP

#include "convaff/core.hpp"
#include "convaff/gauge.hpp"
#include "convaff/hbl.hpp"
#include "convaff/lp.hpp"
#include "convaff/midpoint.hpp"
#include "convaff/mok.hpp"
#include "convaff/polytope.hpp"
#include "convaff/synth.hpp"

#endif  // CONVAFF_CONVAFF_HPP
