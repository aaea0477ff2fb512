#ifndef TAILSERIES_TAILSERIES_HPP
#define TAILSERIES_TAILSERIES_HPP

// Heavy-tailed randomly weighted series X = sum_j A_j Z_j: constructive
// regularly varying noise laws, coefficient processes under a predictability
// contract, moment-condition gatekeeping, closed-form tail-limit constants,
// and a Monte Carlo harness that verifies them.

#include "tailseries/config.hpp"
#include "tailseries/errors.hpp"
#include "tailseries/estimation.hpp"
#include "tailseries/limit_measure.hpp"
#include "tailseries/matrix.hpp"
#include "tailseries/models.hpp"
#include "tailseries/regvar.hpp"
#include "tailseries/report.hpp"
#include "tailseries/rng.hpp"
#include "tailseries/theory.hpp"

#endif  // TAILSERIES_TAILSERIES_HPP
