#ifndef EXLASSO_EXLASSO_HPP
#define EXLASSO_EXLASSO_HPP

//! Umbrella header: the whole solver toolkit.

#include "exlasso/admm.hpp"
#include "exlasso/apg.hpp"
#include "exlasso/backtest.hpp"
#include "exlasso/groups.hpp"
#include "exlasso/io.hpp"
#include "exlasso/jacobian.hpp"
#include "exlasso/losses.hpp"
#include "exlasso/ppdna.hpp"
#include "exlasso/problem.hpp"
#include "exlasso/prox.hpp"
#include "exlasso/spectral.hpp"
#include "exlasso/ssn.hpp"
#include "exlasso/synth.hpp"
#include "exlasso/types.hpp"

#endif  // EXLASSO_EXLASSO_HPP
