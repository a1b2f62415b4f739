#include "bpcalc/report.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <ostream>

#include <fmt/core.h>

#include "bpcalc/csv.hpp"
#include "bpcalc/rng.hpp"

namespace bpcalc {

double numerical_slack(double lhs, double rhs) { return 1e-8 * (1.0 + std::abs(lhs) + std::abs(rhs)); }

namespace {

std::uint64_t hash_doubles(const double* data, std::size_t count, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(data), count * sizeof(double)), h);
}

}  // namespace

std::string digest(std::initializer_list<double> values) {
  return fmt::format("{:016x}", hash_doubles(values.begin(), values.size()));
}

std::string digest(const Eigen::VectorXd& v) {
  return fmt::format("{:016x}", hash_doubles(v.data(), static_cast<std::size_t>(v.size())));
}

std::string digest(const Eigen::VectorXcd& v) {
  return fmt::format("{:016x}", hash_doubles(reinterpret_cast<const double*>(v.data()),
                                             2 * static_cast<std::size_t>(v.size())));
}

bool VerificationRecord::ok() const { return skipped || margin >= -numerical_slack(lhs, rhs); }

void VerificationReport::add(const std::string& section, std::string digest, double lhs, double rhs,
                             std::string note) {
  add_margin(section, std::move(digest), lhs, rhs, rhs - lhs, std::move(note));
}

void VerificationReport::add_margin(const std::string& section, std::string digest, double lhs, double rhs,
                                    double margin, std::string note) {
  VerificationRecord r;
  r.index = records_.size();
  r.section = section;
  r.digest = std::move(digest);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
  r.note = std::move(note);
  records_.push_back(std::move(r));
}

void VerificationReport::skip(const std::string& section, std::string digest, std::string note) {
  VerificationRecord r;
  r.index = records_.size();
  r.section = section;
  r.digest = std::move(digest);
  r.skipped = true;
  r.note = std::move(note);
  records_.push_back(std::move(r));
}

void VerificationReport::param(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }

void VerificationReport::param(const std::string& key, double value) { params_.emplace_back(key, csv_number(value)); }

void VerificationReport::note(std::string text) { notes_.push_back(std::move(text)); }

bool VerificationReport::pass() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.ok() ? 0 : 1;
  return n;
}

double VerificationReport::worst_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : records_) {
    if (!r.skipped) worst = std::min(worst, r.margin);
  }
  return worst;
}

void VerificationReport::write_csv(std::ostream& out, bool header) const {
  if (header) out << "check,section,index,digest,lhs,rhs,margin,status,note\n";
  for (const auto& r : records_) {
    out << csv_field(check_) << ',' << csv_field(r.section) << ',' << r.index << ',' << r.digest << ',';
    if (r.skipped) {
      out << ",,,skipped";
    } else {
      out << csv_number(r.lhs) << ',' << csv_number(r.rhs) << ',' << csv_number(r.margin) << ','
          << (r.ok() ? "pass" : "fail");
    }
    out << ',' << csv_field(r.note) << '\n';
  }
}

void VerificationReport::write_summary(std::ostream& out) const {
  std::size_t skipped = 0;
  for (const auto& r : records_) skipped += r.skipped ? 1 : 0;
  out << "check: " << check_ << '\n';
  out << "verdict: " << (pass() ? "PASS" : "FAIL") << '\n';
  out << "seed: " << seed_ << '\n';
  out << "rng: " << Rng::kAlgorithm << '\n';
  out << "records: " << records_.size() << " (failures " << failures() << ", skipped " << skipped << ")\n";
  out << "worst margin: " << csv_number(worst_margin()) << '\n';
  for (const auto& [k, v] : params_) out << k << ": " << v << '\n';
  for (const auto& n : notes_) out << "note: " << n << '\n';
}

}  // namespace bpcalc
