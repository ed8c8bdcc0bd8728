#include "nhvak/io.hpp"

#include <charconv>
#include <cmath>

namespace nhvak {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

void write_row(std::ostream& os, double t, const std::vector<const VectorXd*>& parts) {
  os << format_double(t);
  for (const VectorXd* p : parts)
    for (Eigen::Index i = 0; i < p->size(); ++i) os << ',' << format_double((*p)(i));
  os << '\n';
}

void write_header(std::ostream& os, const char* prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) os << ',' << prefix << i;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const MultiplierPath* lam) {
  const Eigen::Index n = traj.size() ? traj.q.front().size() : 0;
  os << 't';
  write_header(os, "q", n);
  write_header(os, "v", n);
  if (lam && lam->size()) write_header(os, "lam", lam->lam.front().size());
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::vector<const VectorXd*> parts{&traj.q[i], &traj.v[i]};
    if (lam && i < lam->size()) parts.push_back(&lam->lam[i]);
    write_row(os, traj.t[i], parts);
  }
}

void write_multiplier_csv(std::ostream& os, const MultiplierPath& lam) {
  os << 't';
  write_header(os, "lam", lam.size() ? lam.lam.front().size() : 0);
  os << '\n';
  for (std::size_t i = 0; i < lam.size(); ++i) write_row(os, lam.t[i], {&lam.lam[i]});
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "value,XY,residual,verdict\n";
  for (const SweepRow& r : rows)
    os << format_double(r.value) << ',' << format_double(r.xy) << ','
       << format_double(r.residual) << ',' << (r.verdict ? "true" : "false") << '\n';
}

nlohmann::ordered_json report_to_json(const ComparisonReport& rep, const std::string& system,
                                      const std::map<std::string, double>& params,
                                      std::uint64_t seed, int family_size) {
  nlohmann::ordered_json j;
  j["criterion"] = to_string(rep.criterion);
  j["residual"] = rep.residual;
  j["tolerance"] = rep.tolerance;
  j["verdict"] = rep.verdict;
  j["samples"] = rep.samples;
  j["system"] = system;
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params) p[k] = v;
  j["params"] = p;
  j["seed"] = seed;
  if (family_size > 0) j["family_size"] = family_size;
  return j;
}

}  // namespace nhvak
