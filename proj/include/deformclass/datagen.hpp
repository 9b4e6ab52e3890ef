#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deformclass/model.hpp"

namespace deformclass::datagen {

/// Distribution Q over deformation parameters. Marginals are uniform; tau is
/// drawn conditionally on the realized xi from the exact admissible interval.
struct DeformDistribution {
  std::pair<double, double> eta_range{1.0, 1.0};
  std::pair<double, double> xi_range{1.0, 1.0};
  std::pair<double, double> xi_prime_range{1.0, 1.0};
  double flip_prob = 0.0;  ///< probability of negating xi (resp. xi'), independently
  std::uint64_t seed = 0;
};

/// Throws InvalidDistribution when a range violates its constraint.
void validate(const DeformDistribution& q);

/// Deterministic function of (q.seed, draw_index); always admissible.
DeformParams sample_params(const DeformDistribution& q, std::uint64_t draw_index);

struct LabeledImage {
  GrayImage image;
  int label = 0;
  int template_index = 0;
  DeformParams params;  ///< diagnostics only; never read by classifiers
};

struct Dataset {
  std::vector<LabeledImage> items;
  int d = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;
};

/// Draws n labelled images. Label k ~ Bernoulli(pi), except in balanced mode
/// (pi == 0.5 and n even) where item i gets label i % 2. Item i uses its own
/// substream derived from (q.seed, i), so generation order is immaterial.
Dataset generate_dataset(const std::vector<TemplateFunction>& templates_class0,
                         const std::vector<TemplateFunction>& templates_class1,
                         const DeformDistribution& q, int n, double pi, int d);

/// The non-identifiable pair: f0 is a centred tent and
/// f1(x, y) = eta f0(xi x + tau, xi' y + tau') + g(x, y) where g vanishes on the grid.
struct NonIdentifiableFixture {
  TemplateFunction f0;
  TemplateFunction f1;
  TemplateFunction g;
  double delta = 0.0;
};

/// p is given in the "+tau" convention of the construction and must satisfy
/// eta > 0, xi, xi' > 1/2, tau < 1/4 < tau + xi/2 < 3/4 < tau + xi (same primed).
NonIdentifiableFixture non_identifiable_fixture(int d, const DeformParams& p);

/// Model-convention parameters under which f0 reproduces the fixture data:
/// the construction evaluates f0(xi x + tau), the image model f(xi x - tau),
/// so the shifts are negated.
DeformParams fixture_model_params(const DeformParams& p);

}  // namespace deformclass::datagen
