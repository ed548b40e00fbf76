#pragma once

// Pseudospectral Galerkin solver for the multi-dimensional Aw-Rascle traffic
// system on the periodic torus, with its energy and relative-energy
// diagnostic apparatus.

#include "arsim/commands.hpp"
#include "arsim/config.hpp"
#include "arsim/diagnostics.hpp"
#include "arsim/field.hpp"
#include "arsim/initial.hpp"
#include "arsim/mass_matrix.hpp"
#include "arsim/model.hpp"
#include "arsim/params.hpp"
#include "arsim/snapshot.hpp"
#include "arsim/solver.hpp"
#include "arsim/spectral.hpp"
