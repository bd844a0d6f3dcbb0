#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mfl/dyson.hpp"
#include "mfl/fock.hpp"
#include "mfl/hartree.hpp"
#include "mfl/lattice.hpp"
#include "mfl/observables.hpp"
#include "mfl/phasespace.hpp"
#include "mfl/vlasov.hpp"

namespace mfl {

/// Every writer uses "%.17g" so a written double survives the round trip
/// bitwise; all binary payloads are little-endian float64 / int64.

/// Dense kernel file: header (p, M, dx, hermitian flag) then the row-major
/// complex matrix as float64 pairs.
void write_pkernel(const std::string& path, const PKernel& a);
PKernel read_pkernel(const std::string& path);

/// Amplitude snapshot: header (N, M, L, hbar, t) then rows (ordinal, Re, Im).
void write_fock_snapshot(const std::string& path, const FockBasis& basis, const Lattice& lat,
                         const FockState& s);
FockState read_fock_snapshot(const std::string& path, const FockBasis& basis,
                             const Lattice& lat);

/// Trajectory CSV: columns t, site, re, im, norm, energy (the per-snapshot
/// scalars repeat on each site row of that snapshot).
void write_hartree_trajectory(const std::string& path, const Lattice& lat,
                              const HartreeTrajectory& tr);

/// Phase-space grid CSV (x, xi, value).
void write_phase_csv(const std::string& path, const PhaseGrid& g,
                     const std::vector<double>& vals);
/// Compact binary grid: header (M, L, hbar) then the value array.
void write_phase_binary(const std::string& path, const PhaseGrid& g,
                        const std::vector<double>& vals);
std::vector<double> read_phase_binary(const std::string& path, int* M, double* L,
                                      double* hbar);

/// Ensemble CSV (i, x, xi).
void write_ensemble_csv(const std::string& path, const ParticleEnsemble& e);

/// JSON record {p, k, epsilon, hbar, terms[], sum,
/// bounds{fixed_hbar[], uniform[]}, residual_vs_hartree}.
void write_dyson_json(const std::string& path, const DysonResult& r);

/// FNV-1a 64-bit over a file's bytes; the manifest checksums result files.
uint64_t fnv1a_file(const std::string& path);

std::string format_g17(double v);

} // namespace mfl
