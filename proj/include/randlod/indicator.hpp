#pragma once

#include <vector>

#include "randlod/coefficient.hpp"
#include "randlod/corrector.hpp"
#include "randlod/linalg.hpp"
#include "randlod/offline.hpp"

namespace randlod {

struct IndicatorMatrices {
  Mat S;  // numerator Gram matrix over the corners of T
  Mat B;  // (A grad lambda_k, grad lambda_j)_T
};

/// aPatch is the sampled coefficient on the patch of T in the patch's local
/// element order; mu are the weights used for the combination. The stored
/// corrector values of the database supply the corrector gradients.
IndicatorMatrices compute_SB(const PatchProblem& problem, const CoefficientField& aPatch, const OfflineDatabase& db,
                             const MuWeights& mu);

/// Square root of the largest eigenvalue of S v = nu B v on the complement of constants.
double indicator_ET(const IndicatorMatrices& m);

/// E_T for every coarse element of one sample.
std::vector<double> indicator_field(const PatchProblem& problem, const OfflineDatabase& db, const DefectSample& sample);

}  // namespace randlod
