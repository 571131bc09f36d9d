#include <algorithm>
#include <cmath>

#include "spslab/analysis.hpp"

namespace spslab {

double psi(double r, double A, double B) {
  if (A < 0.0 || B < 0.0) throw ContractError("psi: A and B must be >= 0");
  if (A + B == 0.0) throw ContractError("psi: A and B cannot both be zero");
  if (r < 0.0) throw ContractError("psi: r must be >= 0");
  if (r == 0.0) return 0.0;
  return r * r / (A * r + B);
}

double psi_inv(double s, double A, double B) {
  if (A < 0.0 || B < 0.0) throw ContractError("psi_inv: A and B must be >= 0");
  if (A + B == 0.0) throw ContractError("psi_inv: A and B cannot both be zero");
  if (s < 0.0) throw ContractError("psi_inv: s must be >= 0");
  return 0.5 * (s * A + std::sqrt(s * s * A * A + 4.0 * s * B));
}

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::NonsmoothAvg: return "nonsmooth_avg";
    case CertificateKind::SmoothAvg: return "smooth_avg";
    case CertificateKind::SmoothAvgSigma: return "smooth_avg_sigma";
    case CertificateKind::IamNonsmoothLast: return "iam_nonsmooth_last";
    case CertificateKind::IamSmoothLast: return "iam_smooth_last";
    case CertificateKind::StrongConvexDist: return "strong_convex_dist";
  }
  return "?";
}

namespace {

double need(const std::optional<double>& v, const char* what, CertificateKind k) {
  if (!v) throw ConfigError(to_string(k) + " certificate needs " + what);
  return *v;
}

}  // namespace

RateCertificate certificate(CertificateKind kind, const ProblemConstants& c) {
  RateCertificate cert;
  cert.kind = kind;
  cert.constants = c;
  switch (kind) {
    case CertificateKind::NonsmoothAvg:
      need(c.G_sq, "G_sq", kind);
      cert.threshold = 1.0;
      break;
    case CertificateKind::IamNonsmoothLast:
      need(c.G_sq, "G_sq", kind);
      cert.threshold = 0.0;
      break;
    case CertificateKind::SmoothAvg:
    case CertificateKind::IamSmoothLast:
      need(c.L, "L", kind);
      need(c.delta_star, "delta_star", kind);
      cert.threshold = 1.0;
      break;
    case CertificateKind::SmoothAvgSigma:
      need(c.L, "L", kind);
      need(c.sigma_star_sq, "sigma_star_sq", kind);
      cert.threshold = 1.0;
      break;
    case CertificateKind::StrongConvexDist: {
      const double mu = need(c.mu, "mu", kind);
      if (!(mu > 0.0)) throw ConfigError("strong_convex_dist certificate needs mu > 0");
      if (c.L && c.delta_star) {
        cert.A = 2.0 * *c.L;
        cert.B = 2.0 * *c.L * *c.delta_star;
      } else if (c.G_sq) {
        cert.A = 0.0;
        cert.B = *c.G_sq;
      } else {
        throw ConfigError("strong_convex_dist certificate needs L and delta_star, or G_sq");
      }
      if (!(cert.B > 0.0)) throw ConfigError("strong_convex_dist certificate needs B > 0");
      if (cert.A == 0.0) {
        cert.shift = 0.0;
        cert.threshold = 0.0;
      } else {
        const double lg = std::log(c.D * c.D * mu * mu / (16.0 * cert.B));
        cert.shift = 4.0 * cert.A / mu * lg;
        cert.threshold = std::max(0.0, 2.0 * cert.A / mu * (2.0 * lg + 1.0));
      }
      break;
    }
  }
  return cert;
}

double RateCertificate::bound(double t) const {
  const ProblemConstants& c = constants;
  const double D = c.D;
  switch (kind) {
    case CertificateKind::NonsmoothAvg: return std::sqrt(*c.G_sq) * D / std::sqrt(t);
    case CertificateKind::IamNonsmoothLast: return std::sqrt(*c.G_sq) * D / std::sqrt(t + 1.0);
    case CertificateKind::SmoothAvg:
      return 2.0 * *c.L * D * D / t + std::sqrt(2.0 * *c.L * *c.delta_star) * D / std::sqrt(t);
    case CertificateKind::SmoothAvgSigma:
      return 4.0 * *c.L * D * D / t + std::sqrt(2.0) * D * std::sqrt(*c.sigma_star_sq) / std::sqrt(t);
    case CertificateKind::IamSmoothLast:
      return 2.0 * *c.L * D * D * (std::log(t) + 1.0) / t + std::sqrt(2.0 * *c.L * *c.delta_star) * D / std::sqrt(t);
    case CertificateKind::StrongConvexDist: {
      const double mu = *c.mu;
      return 16.0 * B / (mu * mu) / (t + 1.0 - shift);
    }
  }
  return 0.0;
}

}  // namespace spslab
