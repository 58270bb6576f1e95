#pragma once

// Geometric channel generation, the cascaded BD-RIS channel and power
// measurements.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "bdris/common.hpp"
#include "bdris/model.hpp"

namespace bdris {

enum class Link { bs_user, bs_ris, ris_user };

enum class FadingModel { los, rayleigh };

inline std::string to_string(FadingModel m) { return m == FadingModel::los ? "los" : "rayleigh"; }

inline FadingModel parse_fading_model(const std::string& s) {
  if (s == "los") return FadingModel::los;
  if (s == "rayleigh") return FadingModel::rayleigh;
  throw InvalidInput("unknown fading model '" + s + "' (expected los|rayleigh)");
}

struct SceneGeometry {
  Vec3 bs_position{50.0, -200.0, 20.0};
  Vec3 ris_position{-2.0, -1.0, 0.0};
  Vec3 user_area_min{0.0, 0.0, 0.0};
  Vec3 user_area_max{10.0, 10.0, 0.0};
  std::array<int, 2> upa_dims{2, 2};  // (N_y, N_z)
  double element_spacing = 0.5;       // wavelengths

  int n_elements() const { return upa_dims[0] * upa_dims[1]; }

  void validate(const BdRisConfig& config) const {
    detail::require(upa_dims[0] > 0 && upa_dims[1] > 0, "UPA dimensions must be positive");
    detail::require(n_elements() == config.n_elements,
                    "UPA " + std::to_string(upa_dims[0]) + "x" + std::to_string(upa_dims[1]) +
                        " does not match n_elements " + std::to_string(config.n_elements));
    int extended = 0;
    for (int i = 0; i < 3; ++i) {
      detail::require(user_area_max[i] >= user_area_min[i], "user area corners are inverted");
      if (user_area_max[i] > user_area_min[i]) ++extended;
    }
    detail::require(extended >= 2, "user area is degenerate");
    detail::require(element_spacing > 0.0, "element spacing must be positive");
  }

  /// Element offset from the reference point, in wavelengths. The array lies
  /// in the y-z plane; element n = iz * N_y + iy.
  Vec3 element_offset(int n) const {
    const int iy = n % upa_dims[0];
    const int iz = n / upa_dims[0];
    return {0.0, iy * element_spacing, iz * element_spacing};
  }
};

struct ChannelModel {
  FadingModel ris_links = FadingModel::los;
  double tx_power_w = 1.0;  // 30 dBm
};

struct ChannelRealization {
  cplx h_bu;
  CVector h_br;
  CVector h_ru;
  double tx_power = 1.0;
  Vec3 user_position = Vec3::Zero();
};

/// h̄ = sqrt(P) [h_BU; vec(M_1*); ...; vec(M_K*)], M = h_RU h_BR^H.
struct CascadedChannel {
  CVector entries;
};

struct AutocorrelationMatrix {
  CMatrix entries;
};

struct PowerMeasurement {
  int trp_index = 0;
  double power = 0.0;        // W
  double noise_power = 0.0;  // W
};

inline double path_loss_db(Link link, double distance) {
  detail::require(distance > 0.0 && std::isfinite(distance), "distance must be positive");
  if (link == Link::bs_user) return 33.0 + 37.0 * std::log10(distance);
  return 30.0 + 20.0 * std::log10(distance);
}

namespace detail {

inline CVector steering_vector(const SceneGeometry& scene, const Vec3& direction) {
  const Vec3 u = direction.normalized();
  CVector a(scene.n_elements());
  for (int n = 0; n < scene.n_elements(); ++n) {
    const double phase = 2.0 * std::numbers::pi * scene.element_offset(n).dot(u);
    a(n) = std::polar(1.0, phase);
  }
  return a;
}

inline CVector ris_link(const SceneGeometry& scene, FadingModel model, const Vec3& direction,
                        double loss_db, Rng& rng) {
  const double gain = std::pow(10.0, -loss_db / 10.0);
  if (model == FadingModel::rayleigh) {
    CVector h(scene.n_elements());
    for (auto& e : h) e = complex_gaussian(rng, gain);
    return h;
  }
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  return std::sqrt(gain) * std::polar(1.0, phase(rng)) * steering_vector(scene, direction);
}

}  // namespace detail

inline Vec3 draw_user_position(const SceneGeometry& scene, Rng& rng) {
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    std::uniform_real_distribution<double> u(scene.user_area_min[i], scene.user_area_max[i]);
    p[i] = scene.user_area_max[i] > scene.user_area_min[i] ? u(rng) : scene.user_area_min[i];
  }
  return p;
}

/// Rayleigh BS-user link; BS-RIS and RIS-user per `model.ris_links`. The user
/// is drawn uniformly in the user area unless supplied.
inline ChannelRealization draw_channels(const SceneGeometry& scene, const BdRisConfig& config,
                                        const ChannelModel& model, Rng& rng,
                                        std::optional<Vec3> user = std::nullopt) {
  config.validate();
  scene.validate(config);
  detail::require(model.tx_power_w > 0.0, "transmit power must be positive");

  ChannelRealization ch;
  ch.tx_power = model.tx_power_w;
  ch.user_position = user ? *user : draw_user_position(scene, rng);

  const double d0 = (scene.bs_position - ch.user_position).norm();
  const double d1 = (scene.bs_position - scene.ris_position).norm();
  const double d2 = (ch.user_position - scene.ris_position).norm();

  ch.h_bu = complex_gaussian(rng, std::pow(10.0, -path_loss_db(Link::bs_user, d0) / 10.0));
  ch.h_br = detail::ris_link(scene, model.ris_links, scene.bs_position - scene.ris_position,
                             path_loss_db(Link::bs_ris, d1), rng);
  ch.h_ru = detail::ris_link(scene, model.ris_links, ch.user_position - scene.ris_position,
                             path_loss_db(Link::ris_user, d2), rng);
  return ch;
}

/// g = sqrt(P) (h_BU + h_RU^H Θ h_BR), evaluated block by block.
inline cplx end_to_end_channel(const ChannelRealization& ch, const ScatteringMatrix& theta) {
  detail::require(ch.h_br.size() == theta.n_elements() && ch.h_ru.size() == theta.n_elements(),
                  "end_to_end_channel: channel length does not match reflection matrix");
  const int n0 = theta.group_size();
  cplx reflected{0.0, 0.0};
  for (int k = 0; k < theta.n_groups(); ++k) {
    reflected += ch.h_ru.segment(k * n0, n0).dot(theta.blocks()[k] * ch.h_br.segment(k * n0, n0));
  }
  return std::sqrt(ch.tx_power) * (ch.h_bu + reflected);
}

inline CascadedChannel cascade(const ChannelRealization& ch, const BdRisConfig& config) {
  config.validate();
  detail::require(ch.h_br.size() == config.n_elements && ch.h_ru.size() == config.n_elements,
                  "cascade: channel length does not match configuration");
  const int n0 = config.group_size();
  const double amp = std::sqrt(ch.tx_power);
  CascadedChannel h{CVector(config.trp_length())};
  h.entries(0) = amp * ch.h_bu;
  Eigen::Index i = 1;
  for (int k = 0; k < config.n_groups; ++k) {
    for (int c = 0; c < n0; ++c)
      for (int r = 0; r < n0; ++r)
        h.entries(i++) = amp * std::conj(ch.h_ru(k * n0 + r)) * ch.h_br(k * n0 + c);
  }
  return h;
}

/// The part of h̄ seen by symmetric reflection blocks: entries (r,c) and (c,r)
/// of each block replaced by their mean. Power measurements under any valid
/// TRP are identical for h̄ and its observable part.
inline CascadedChannel observable_cascade(const CascadedChannel& h, int group_size) {
  CascadedChannel out = h;
  const Eigen::Index per_block = static_cast<Eigen::Index>(group_size) * group_size;
  for (Eigen::Index base = 1; base + per_block <= h.entries.size(); base += per_block) {
    for (int c = 0; c < group_size; ++c)
      for (int r = c + 1; r < group_size; ++r) {
        const auto a = base + c * group_size + r;
        const auto b = base + r * group_size + c;
        const cplx m = 0.5 * (h.entries(a) + h.entries(b));
        out.entries(a) = m;
        out.entries(b) = m;
      }
  }
  return out;
}

inline AutocorrelationMatrix true_autocorrelation(const CascadedChannel& h) {
  return {h.entries * h.entries.adjoint()};
}

/// |v̄^H h̄ + n|^2 with n ~ CN(0, noise_power). The noise draw always consumes
/// the generator, so equal seeds give paired noise across noise levels.
inline PowerMeasurement measure_power(const CascadedChannel& h, const TrpVector& v,
                                      double noise_power, Rng& rng, int trp_index = 0) {
  detail::require(noise_power >= 0.0, "noise power must be nonnegative");
  detail::require(v.size() == h.entries.size(), "measure_power: TRP length mismatch");
  const cplx g = v.entries.dot(h.entries);
  const cplx n = complex_gaussian(rng, 1.0) * std::sqrt(noise_power);
  return {trp_index, std::max(0.0, std::norm(g + n)), noise_power};
}

}  // namespace bdris
