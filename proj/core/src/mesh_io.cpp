#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "otlab/error.hpp"
#include "otlab/submanifold.hpp"

namespace otlab {

namespace {

constexpr const char* kMagic = "otlab-mesh";
constexpr int kVersion = 1;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Euclidean: return "euclidean";
    case Variant::Sphere: return "sphere";
    case Variant::Hyperbolic: return "hyperbolic";
    case Variant::ProductWithLine: return "product_with_line";
  }
  return "unknown";
}

void put_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << fmt(v[i]);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::istringstream line(const std::string& expected_tag) {
    std::string text;
    if (!std::getline(in_, text)) fail("unexpected end of file, expected '" + expected_tag + "'");
    ++lineno_;
    std::istringstream ss(text);
    if (!expected_tag.empty()) {
      std::string tag;
      ss >> tag;
      if (tag != expected_tag) fail("expected '" + expected_tag + "', found '" + tag + "'");
    }
    return ss;
  }

  template <class T>
  T get(std::istringstream& ss, const char* what) {
    T v{};
    if (!(ss >> v)) fail(std::string("cannot read ") + what);
    return v;
  }

  Vector vec(std::istringstream& ss, int size, const char* what) {
    Vector v(size);
    for (int i = 0; i < size; ++i) v[i] = get<double>(ss, what);
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    raise(ErrorKind::ParseError, "mesh line " + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

ModelManifold manifold_from(const std::string& kind, int base_dim, double K) {
  if (kind == "euclidean") return ModelManifold::euclidean(base_dim);
  if (kind == "sphere") return ModelManifold::sphere(base_dim, K);
  if (kind == "hyperbolic") return ModelManifold::hyperbolic(base_dim, K);
  raise(ErrorKind::ParseError, "unknown manifold variant '" + kind + "'");
}

}  // namespace

void export_mesh(const SubmanifoldMesh& mesh, std::ostream& out) {
  const ModelManifold& M = mesh.manifold;
  const int E = M.embedding_dim();
  const auto& h = mesh.chart.height;
  out << kMagic << ' ' << kVersion << '\n';
  out << "manifold " << variant_name(M.base_variant()) << ' ' << M.base().dim() << ' ' << fmt(M.curvature())
      << ' ' << (M.has_line() ? 1 : 0) << '\n';
  out << "chart " << chart_kind_name(mesh.chart.kind) << ' ' << fmt(mesh.chart.radius) << ' ' << fmt(h.a11)
      << ' ' << fmt(h.a12) << ' ' << fmt(h.a22) << ' ' << fmt(h.b1) << ' ' << fmt(h.b2) << '\n';
  out << "resolution " << mesh.resolution.radial_cells << ' ' << mesh.resolution.angular_cells << '\n';
  out << "lifted " << (mesh.lifted ? 1 : 0) << '\n';
  out << "dims " << mesh.n << ' ' << mesh.m << ' ' << E << '\n';
  out << "spacing " << fmt(mesh.spacing) << '\n';
  out << "nodes " << mesh.nodes.size() << '\n';
  for (const auto& node : mesh.nodes) {
    const NodeGeometry& g = node.geometry;
    out << fmt(node.param.x()) << ' ' << fmt(node.param.y()) << ' ' << fmt(node.weight);
    put_vector(out, g.point);
    for (const auto& e : g.tangent) put_vector(out, e);
    for (const auto& v : g.normal) put_vector(out, v);
    for (const auto& II : g.sff) {
      for (int i = 0; i < mesh.n; ++i) {
        for (int j = 0; j < mesh.n; ++j) out << ' ' << fmt(II(i, j));
      }
    }
    put_vector(out, g.mean_curvature);
    for (int c = 0; c < 2; ++c) put_vector(out, g.jacobian.col(c));
    out << '\n';
  }
  out << "boundary " << mesh.boundary.size() << '\n';
  for (const auto& b : mesh.boundary) {
    out << fmt(b.param.x()) << ' ' << fmt(b.param.y()) << ' ' << fmt(b.weight);
    put_vector(out, b.point);
    out << '\n';
  }
  out << "end\n";
  if (!out) raise(ErrorKind::IoError, "mesh export stream failed");
}

SubmanifoldMesh import_mesh(std::istream& in) {
  Reader r(in);
  {
    auto ss = r.line(kMagic);
    if (r.get<int>(ss, "version") != kVersion) r.fail("unsupported mesh version");
  }
  SubmanifoldMesh mesh;
  bool line_factor = false;
  ModelManifold base = ModelManifold::euclidean(1);
  {
    auto ss = r.line("manifold");
    const auto kind = r.get<std::string>(ss, "variant");
    const int dim = r.get<int>(ss, "dimension");
    const double K = r.get<double>(ss, "curvature");
    line_factor = r.get<int>(ss, "line flag") != 0;
    base = manifold_from(kind, dim, K);
  }
  {
    auto ss = r.line("chart");
    mesh.chart.kind = chart_kind_from_name(r.get<std::string>(ss, "chart kind"));
    mesh.chart.radius = r.get<double>(ss, "radius");
    auto& h = mesh.chart.height;
    h.a11 = r.get<double>(ss, "a11");
    h.a12 = r.get<double>(ss, "a12");
    h.a22 = r.get<double>(ss, "a22");
    h.b1 = r.get<double>(ss, "b1");
    h.b2 = r.get<double>(ss, "b2");
  }
  {
    auto ss = r.line("resolution");
    mesh.resolution.radial_cells = r.get<int>(ss, "radial cells");
    mesh.resolution.angular_cells = r.get<int>(ss, "angular cells");
  }
  {
    auto ss = r.line("lifted");
    mesh.lifted = r.get<int>(ss, "lifted flag") != 0;
  }
  if (mesh.lifted != line_factor) r.fail("lifted flag disagrees with the line factor");
  mesh.geometry = make_chart(base, mesh.chart);
  if (mesh.lifted) mesh.geometry = lift_chart(mesh.geometry);
  mesh.manifold = mesh.geometry->manifold();
  int E = 0;
  {
    auto ss = r.line("dims");
    mesh.n = r.get<int>(ss, "n");
    mesh.m = r.get<int>(ss, "m");
    E = r.get<int>(ss, "embedding dimension");
  }
  if (E != mesh.manifold.embedding_dim() || mesh.n + mesh.m != mesh.manifold.dim()) {
    r.fail("dimensions disagree with the manifold record");
  }
  {
    auto ss = r.line("spacing");
    mesh.spacing = r.get<double>(ss, "spacing");
  }
  int count = 0;
  {
    auto ss = r.line("nodes");
    count = r.get<int>(ss, "node count");
  }
  mesh.nodes.resize(count);
  for (auto& node : mesh.nodes) {
    auto ss = r.line("");
    node.param.x() = r.get<double>(ss, "u1");
    node.param.y() = r.get<double>(ss, "u2");
    node.weight = r.get<double>(ss, "weight");
    NodeGeometry& g = node.geometry;
    g.point = r.vec(ss, E, "point");
    for (int a = 0; a < mesh.n; ++a) g.tangent.push_back(r.vec(ss, E, "tangent"));
    for (int a = 0; a < mesh.m; ++a) g.normal.push_back(r.vec(ss, E, "normal"));
    for (int a = 0; a < mesh.m; ++a) {
      Matrix II(mesh.n, mesh.n);
      for (int i = 0; i < mesh.n; ++i) {
        for (int j = 0; j < mesh.n; ++j) II(i, j) = r.get<double>(ss, "second fundamental form");
      }
      g.sff.push_back(II);
    }
    g.mean_curvature = r.vec(ss, E, "mean curvature");
    g.jacobian.resize(E, 2);
    for (int c = 0; c < 2; ++c) g.jacobian.col(c) = r.vec(ss, E, "jacobian");
  }
  {
    auto ss = r.line("boundary");
    count = r.get<int>(ss, "boundary count");
  }
  mesh.boundary.resize(count);
  for (auto& b : mesh.boundary) {
    auto ss = r.line("");
    b.param.x() = r.get<double>(ss, "u1");
    b.param.y() = r.get<double>(ss, "u2");
    b.weight = r.get<double>(ss, "weight");
    b.point = r.vec(ss, E, "point");
  }
  r.line("end");
  return mesh;
}

}  // namespace otlab
