#include "mia/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "mia/errors.hpp"

namespace mia {

void SynthSpec::validate() const {
  if (n_members == 0 || n_nonmembers == 0) {
    throw ValidationError("synthetic dump needs at least one record per class");
  }
  if (feature_dim == 0) {
    throw ValidationError("feature_dim must be >= 1");
  }
  if (!(member_loss.stddev >= 0.0) || !(nonmember_loss.stddev >= 0.0)) {
    throw ValidationError("loss stddevs must be >= 0");
  }
  if (!std::isfinite(member_loss.mean) || !std::isfinite(nonmember_loss.mean) ||
      !std::isfinite(member_loss.stddev) ||
      !std::isfinite(nonmember_loss.stddev) || !std::isfinite(feature_shift)) {
    throw ValidationError("synthetic parameters must be finite");
  }
}

std::vector<ScoreRecord> generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<ScoreRecord> records;
  records.reserve(spec.n_members + spec.n_nonmembers);

  auto emit = [&](Label label, std::size_t count, const GaussianParams& loss,
                  double shift, char prefix) {
    for (std::size_t i = 0; i < count; ++i) {
      ScoreRecord r;
      char id[32];
      std::snprintf(id, sizeof id, "%c-%06zu", prefix, i);
      r.example_id = id;
      r.label = label;
      r.loss = loss.mean + loss.stddev * unit(rng);
      r.features.resize(spec.feature_dim);
      for (auto& f : r.features) f = unit(rng);
      r.features[0] += shift;
      records.push_back(std::move(r));
    }
  };
  emit(Label::Member, spec.n_members, spec.member_loss, spec.feature_shift, 'm');
  emit(Label::NonMember, spec.n_nonmembers, spec.nonmember_loss, 0.0, 'n');
  return records;
}

}  // namespace mia
