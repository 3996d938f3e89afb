#pragma once

// Envelope of intermediate lines of a smooth plane curve: affine-invariant
// frames, the (t, s) pairing locus, the three envelope components
// (AEIL / IPTL / CTL), and singularity classification across alpha.

#include "eil/affine_invariants.hpp"
#include "eil/curve.hpp"
#include "eil/envelope.hpp"
#include "eil/errors.hpp"
#include "eil/geometry.hpp"
#include "eil/io.hpp"
#include "eil/pair_locus.hpp"
#include "eil/singularities.hpp"
