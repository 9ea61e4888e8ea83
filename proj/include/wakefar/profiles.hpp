#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "wakefar/model.hpp"

namespace wakefar {

/// Value, first and second tau-derivative of one similarity profile.
struct ProfileJet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

/// Index order used everywhere: E, G, H, R1, R2.
using ProfileJets = std::array<ProfileJet, 5>;

/// Anything that can supply the five similarity profiles with two
/// derivatives on [0, support()].
class ProfileSource {
 public:
  virtual ~ProfileSource() = default;
  virtual double support() const = 0;
  virtual ProfileJets jets(double tau) const = 0;
};

/// Profiles given as closed-form callables (used for manufactured checks).
class AnalyticProfiles : public ProfileSource {
 public:
  using Fn = std::function<ProfileJets(double)>;
  AnalyticProfiles(Fn fn, double support) : fn_(std::move(fn)), support_(support) {}
  double support() const override { return support_; }
  ProfileJets jets(double tau) const override { return fn_(tau); }

 private:
  Fn fn_;
  double support_;
};

struct ProfileMeta {
  double alpha = 0.0;
  double a = 1.0;
  double c1 = 0.0;
  double edge_p = 0.0;  // E ~ c1 (a - tau)^edge_p
  double e0 = 0.0, g0 = 0.0, h0 = 0.0, r10 = 0.0, r20 = 0.0;
  double h_max = 0.0;
  double mismatch = 0.0;      // final shooting mismatch norm
  double residual_norm = 0.0; // max relative ODE residual on the check grid
  double residual_smooth = 0.0;  // same, skipping the cell that holds the match jump
  double tau_match = 0.0;     // where a least-squares solution may jump
  double scale = 1.0;         // I3 factor applied after the solve
  int iterations = 0;
  bool converged = false;
};

/// Tabulated profiles on a strictly increasing grid from 0 to a. Values come
/// from the cubic Hermite interpolant of (f, f'), second derivatives from the
/// Hermite interpolant of (f', f''). Outside [0, a] every field is zero.
class SolutionProfiles : public ProfileSource {
 public:
  SolutionProfiles() = default;
  SolutionProfiles(std::vector<SimilarityState> nodes,
                   std::vector<SecondDerivs> second, ProfileMeta meta);

  const std::vector<SimilarityState>& nodes() const { return nodes_; }
  const std::vector<SecondDerivs>& second() const { return second_; }
  const ProfileMeta& meta() const { return meta_; }
  ProfileMeta& meta() { return meta_; }
  bool empty() const { return nodes_.empty(); }

  double support() const override;
  ProfileJets jets(double tau) const override;
  SimilarityState at(double tau) const;

  /// Profiles of the I3 image: E, G, R2 scaled by lambda^2, H, R1 unchanged,
  /// radius stretched by lambda.
  SolutionProfiles rescaled(double lambda) const;

 private:
  std::size_t cell(double tau) const;
  std::vector<SimilarityState> nodes_;
  std::vector<SecondDerivs> second_;
  ProfileMeta meta_;
};

/// Jet in (x, y, z) of f(tau) with tau = hypot(y, z) / x^alpha.
FieldJet profile_jet(const ProfileJet& f, double x, double y, double z, double alpha);

/// Physical fields and their jets at (x, y, z) from similarity profiles.
/// Outside the support the fields are zero with in_support = false unless
/// `strict`, in which case OutOfSupport is thrown.
PhysicalPoint similarity_lift(const ProfileSource& profiles, double x, double y,
                              double z, const ModelConstants& k,
                              bool strict = false);

}  // namespace wakefar
