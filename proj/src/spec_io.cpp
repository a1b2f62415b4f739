#include "bpcalc/spec_io.hpp"

#include <fmt/core.h>

#include "bpcalc/errors.hpp"

namespace bpcalc {

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

double read_double(const YAML::Node& node, const std::string& key) {
  if (!node || !node.IsScalar()) throw ParseError(key, line_of(node), "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError(key, line_of(node), fmt::format("'{}' is not a number", node.Scalar()));
  }
}

int read_int(const YAML::Node& node, const std::string& key) {
  if (!node || !node.IsScalar()) throw ParseError(key, line_of(node), "expected an integer");
  try {
    return node.as<int>();
  } catch (const YAML::Exception&) {
    throw ParseError(key, line_of(node), fmt::format("'{}' is not an integer", node.Scalar()));
  }
}

Vector read_vector(const YAML::Node& node, const std::string& key) {
  if (node && node.IsScalar()) return Vector::Constant(1, read_double(node, key));
  if (!node || !node.IsSequence()) throw ParseError(key, line_of(node), "expected a list of numbers");
  Vector v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = read_double(node[i], key);
  return v;
}

namespace {

std::string read_string(const YAML::Node& node, const std::string& key) {
  if (!node || !node.IsScalar()) throw ParseError(key, line_of(node), "expected a string");
  return node.Scalar();
}

const YAML::Node required(const YAML::Node& map, const std::string& key) {
  const YAML::Node n = map[key];
  if (!n) throw ParseError(key, line_of(map), "missing required key");
  return n;
}

std::vector<Atom> read_atoms(const YAML::Node& node) {
  if (!node.IsSequence()) throw ParseError("atoms", line_of(node), "expected a list of [u..., w]");
  std::vector<Atom> atoms;
  for (const YAML::Node& item : node) {
    const Vector v = read_vector(item, "atoms");
    if (v.size() < 2) throw ParseError("atoms", line_of(item), "atom needs a location and a weight");
    atoms.push_back({v.head(v.size() - 1), v[v.size() - 1]});
  }
  return atoms;
}

template <class F>
auto guarded(const YAML::Node& node, const std::string& key, F&& build) {
  try {
    return build();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(key, line_of(node), e.what());
  }
}

void emit_double(YAML::Emitter& out, double v) { out << v; }

void emit_vector(YAML::Emitter& out, const Vector& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) emit_double(out, v[i]);
  out << YAML::EndSeq;
}

void emit_atoms(YAML::Emitter& out, const std::vector<Atom>& atoms) {
  out << YAML::Key << "atoms" << YAML::Value << YAML::BeginSeq;
  for (const Atom& a : atoms) {
    Vector v(a.location.size() + 1);
    v << a.location, a.weight;
    emit_vector(out, v);
  }
  out << YAML::EndSeq;
}

}  // namespace

BernsteinSpec spec_from_node(const YAML::Node& node) {
  if (!node || !node.IsMap()) throw ParseError("family", line_of(node), "function must be a mapping");
  const YAML::Node fam = required(node, "family");
  Family family;
  try {
    family = family_from_tag(read_string(fam, "family"));
  } catch (const DomainError& e) {
    throw ParseError("family", line_of(fam), e.what());
  }
  const int dimension = node["dimension"] ? read_int(node["dimension"], "dimension") : 1;
  switch (family) {
    case Family::FractionalPower: {
      const double alpha = read_double(required(node, "alpha"), "alpha");
      return guarded(node["alpha"], "alpha", [&] { return BernsteinSpec::fractional_power(alpha, dimension); });
    }
    case Family::Log:
      return guarded(node, "dimension", [&] { return BernsteinSpec::log(dimension); });
    case Family::CompoundPoisson: {
      auto atoms = read_atoms(required(node, "atoms"));
      return guarded(node["atoms"], "atoms", [&] { return BernsteinSpec::compound_poisson(std::move(atoms)); });
    }
    case Family::Linear: {
      const double c0 = node["c0"] ? read_double(node["c0"], "c0") : 0.0;
      const Vector c1 = read_vector(required(node, "c1"), "c1");
      return guarded(node, "c1", [&] { return BernsteinSpec::linear(c0, c1); });
    }
    case Family::Triple: {
      const double c0 = node["c0"] ? read_double(node["c0"], "c0") : 0.0;
      const Vector c1 = read_vector(required(node, "c1"), "c1");
      std::vector<Atom> atoms = node["atoms"] ? read_atoms(node["atoms"]) : std::vector<Atom>{};
      std::vector<RayDensity> rays;
      if (const YAML::Node dens = node["densities"]) {
        if (!dens.IsSequence()) throw ParseError("densities", line_of(dens), "expected a list");
        for (const YAML::Node& d : dens) {
          RayDensity r;
          r.direction = read_vector(required(d, "direction"), "direction");
          const std::string kind = read_string(required(d, "kind"), "kind");
          if (kind == "stable") {
            r.kind = DensityKind::Stable;
            r.alpha = read_double(required(d, "alpha"), "alpha");
          } else if (kind == "gamma") {
            r.kind = DensityKind::Gamma;
          } else {
            throw ParseError("kind", line_of(d["kind"]), "density kind must be 'stable' or 'gamma'");
          }
          r.weight = d["weight"] ? read_double(d["weight"], "weight") : 1.0;
          rays.push_back(std::move(r));
        }
      }
      return guarded(node, "c1", [&] {
        return BernsteinSpec::triple(LevyTriple(c0, c1, std::move(atoms), std::move(rays)));
      });
    }
    case Family::RaySum: {
      const YAML::Node rays = required(node, "rays");
      if (!rays.IsSequence()) throw ParseError("rays", line_of(rays), "expected a list");
      std::vector<RayTerm> terms;
      for (const YAML::Node& r : rays) {
        RayTerm t;
        t.direction = read_vector(required(r, "direction"), "direction");
        t.weight = r["weight"] ? read_double(r["weight"], "weight") : 1.0;
        t.inner = share(spec_from_node(required(r, "inner")));
        terms.push_back(std::move(t));
      }
      return guarded(rays, "rays", [&] { return BernsteinSpec::ray_sum(std::move(terms)); });
    }
  }
  throw ParseError("family", line_of(fam), "unsupported family");
}

void emit_spec(YAML::Emitter& out, const BernsteinSpec& spec) {
  out << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << std::string(family_tag(spec.family()));
  switch (spec.family()) {
    case Family::FractionalPower:
      out << YAML::Key << "alpha" << YAML::Value;
      emit_double(out, spec.alpha());
      out << YAML::Key << "dimension" << YAML::Value << spec.dimension();
      break;
    case Family::Log:
      out << YAML::Key << "dimension" << YAML::Value << spec.dimension();
      break;
    case Family::CompoundPoisson:
      emit_atoms(out, spec.atoms());
      break;
    case Family::Linear:
      out << YAML::Key << "c0" << YAML::Value;
      emit_double(out, spec.c0());
      out << YAML::Key << "c1" << YAML::Value;
      emit_vector(out, spec.c1());
      break;
    case Family::Triple: {
      const LevyTriple& t = spec.levy_triple();
      out << YAML::Key << "c0" << YAML::Value;
      emit_double(out, t.c0());
      out << YAML::Key << "c1" << YAML::Value;
      emit_vector(out, t.c1());
      if (!t.atoms().empty()) emit_atoms(out, t.atoms());
      if (!t.rays().empty()) {
        out << YAML::Key << "densities" << YAML::Value << YAML::BeginSeq;
        for (const RayDensity& d : t.rays()) {
          out << YAML::BeginMap;
          out << YAML::Key << "direction" << YAML::Value;
          emit_vector(out, d.direction);
          out << YAML::Key << "kind" << YAML::Value << (d.kind == DensityKind::Stable ? "stable" : "gamma");
          if (d.kind == DensityKind::Stable) {
            out << YAML::Key << "alpha" << YAML::Value;
            emit_double(out, d.alpha);
          }
          out << YAML::Key << "weight" << YAML::Value;
          emit_double(out, d.weight);
          out << YAML::EndMap;
        }
        out << YAML::EndSeq;
      }
      break;
    }
    case Family::RaySum:
      out << YAML::Key << "rays" << YAML::Value << YAML::BeginSeq;
      for (const RayTerm& t : spec.terms()) {
        out << YAML::BeginMap;
        out << YAML::Key << "direction" << YAML::Value;
        emit_vector(out, t.direction);
        out << YAML::Key << "weight" << YAML::Value;
        emit_double(out, t.weight);
        out << YAML::Key << "inner" << YAML::Value;
        emit_spec(out, *t.inner);
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
      break;
  }
  out << YAML::EndMap;
}

std::string serialize_spec(const BernsteinSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  emit_spec(out, spec);
  return std::string(out.c_str()) + "\n";
}

BernsteinSpec parse_spec(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("<document>", e.mark.line + 1, e.msg);
  }
  return spec_from_node(root);
}

}  // namespace bpcalc
