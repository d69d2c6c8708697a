#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compactfold/conformation.hpp"

namespace compactfold {

// Occupancy bits b_{i,n}: residue i sits on site n. Flat index i*sites + n.
class BitState {
 public:
  BitState() = default;
  BitState(int residues, int sites)
      : residues_(residues), sites_(sites), bits_(static_cast<std::size_t>(residues) * sites, 0) {}
  BitState(int residues, int sites, std::vector<std::uint8_t> bits);

  int residues() const { return residues_; }
  int sites() const { return sites_; }
  std::size_t size() const { return bits_.size(); }
  std::size_t index(int residue, int site) const {
    return static_cast<std::size_t>(residue) * sites_ + site;
  }
  bool get(int residue, int site) const { return bits_[index(residue, site)] != 0; }
  void set(int residue, int site, bool value) { bits_[index(residue, site)] = value ? 1 : 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }
  std::size_t popcount() const;

  bool operator==(const BitState&) const = default;

 private:
  int residues_ = 0;
  int sites_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct LagrangeParams {
  double one_site = 1.5;      // lambda_1, one site per residue
  double self_avoid = 2.0;    // lambda_2, one residue per site
  double connectivity = 2.0;  // lambda_3, bonded residues on neighbouring sites

  bool operator==(const LagrangeParams&) const = default;
};
void validate(const LagrangeParams& lambda);

// Contact energy plus the three (unweighted) penalty energies.
struct TermEnergies {
  double contact = 0.0;
  double one_site = 0.0;
  double self_avoid = 0.0;
  double connectivity = 0.0;

  double penalty_sum() const { return one_site + self_avoid + connectivity; }
  bool penalties_zero() const { return one_site == 0 && self_avoid == 0 && connectivity == 0; }
  double total(const LagrangeParams& lambda) const {
    return contact + lambda.one_site * one_site + lambda.self_avoid * self_avoid +
           lambda.connectivity * connectivity;
  }
};

struct QuadraticEntry {
  std::uint32_t i;
  std::uint32_t j;  // i < j
  double coeff;
  bool operator==(const QuadraticEntry&) const = default;
};

struct TermBreakdown;

// E(b) = constant + sum_k linear[k] b_k + sum_{i<j} q_ij b_i b_j.
struct QuboModel {
  std::size_t n_bits = 0;
  std::vector<double> linear;
  std::vector<QuadraticEntry> quadratic;  // ascending (i, j), each pair once
  double constant = 0.0;
  // Unweighted per-term models, present for models built by build_qubo().
  std::shared_ptr<const TermBreakdown> breakdown;

  double energy(std::span<const std::uint8_t> bits) const;
  std::optional<TermEnergies> term_energies(std::span<const std::uint8_t> bits) const;
  std::size_t nonzero_linear() const;
};

struct TermBreakdown {
  LagrangeParams lambda;
  int residues = 0;
  int sites = 0;
  QuboModel contact;
  QuboModel one_site;
  QuboModel self_avoid;
  QuboModel connectivity;
};

// Builds E = E_MJ + l1 E1 + l2 E2 + l3 E3 over N*L bits. N need not equal L.
QuboModel build_qubo(const Sequence& seq, const Lattice& lattice, const ContactMatrix& matrix,
                     const LagrangeParams& lambda);

// Direct evaluation of the four closed-form terms.
TermEnergies eval_terms(const BitState& bits, const Sequence& seq, const Lattice& lattice,
                        const ContactMatrix& matrix);

BitState encode(const Conformation& conf, const Lattice& lattice);

struct DecodeViolation {
  enum class Kind { kOneSite, kSelfAvoid, kConnectivity };
  Kind kind;
  int residue;  // kOneSite: residue; kSelfAvoid: -1; kConnectivity: first residue of the bond
  int site;     // kSelfAvoid: the shared site; otherwise -1
  std::string message;
};

struct DecodeResult {
  std::optional<Conformation> conformation;
  std::vector<DecodeViolation> violations;
  bool ok() const { return conformation.has_value(); }
};

DecodeResult decode(const BitState& bits, const Lattice& lattice);

// Coordinate text format:
//   qubo n_bits <n> constant <c>
//   l <i> <coeff>        (one per bit)
//   q <i> <j> <coeff>    (i < j)
// Coefficients carry 17 significant digits; '#' starts a comment.
void export_qubo(const QuboModel& model, std::ostream& out);
QuboModel import_qubo(std::istream& in);

}  // namespace compactfold
