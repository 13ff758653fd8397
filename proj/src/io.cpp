#include <qbmor/io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qbmor {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open for writing: " + path);
  return out;
}

struct MtxData {
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<double>> entries;
  bool dense = false;
};

MtxData read_mtx(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open for reading: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, "empty MatrixMarket file: " + path);
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  require(tag == "%%MatrixMarket" && object == "matrix", ErrorCode::Io, "bad MatrixMarket banner: " + path);
  require(field == "real" || field == "integer", ErrorCode::Io, "unsupported MatrixMarket field: " + path);
  require(symmetry == "general", ErrorCode::Io, "unsupported MatrixMarket symmetry: " + path);
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  MtxData d;
  std::istringstream size_line(line);
  if (format == "coordinate") {
    Index nnz = 0;
    require(static_cast<bool>(size_line >> d.rows >> d.cols >> nnz), ErrorCode::Io, "bad size line: " + path);
    d.entries.reserve(static_cast<std::size_t>(nnz));
    for (Index e = 0; e < nnz; ++e) {
      Index i = 0, j = 0;
      double v = 0.0;
      require(static_cast<bool>(in >> i >> j >> v), ErrorCode::Io, "truncated coordinate data: " + path);
      require(i >= 1 && i <= d.rows && j >= 1 && j <= d.cols, ErrorCode::Io, "index out of range: " + path);
      d.entries.emplace_back(i - 1, j - 1, v);
    }
  } else if (format == "array") {
    d.dense = true;
    require(static_cast<bool>(size_line >> d.rows >> d.cols), ErrorCode::Io, "bad size line: " + path);
    for (Index j = 0; j < d.cols; ++j)
      for (Index i = 0; i < d.rows; ++i) {
        double v = 0.0;
        require(static_cast<bool>(in >> v), ErrorCode::Io, "truncated array data: " + path);
        if (v != 0.0) d.entries.emplace_back(i, j, v);
      }
  } else {
    throw Error(ErrorCode::Io, "unsupported MatrixMarket format: " + path);
  }
  return d;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

json read_manifest(const std::string& dir) {
  const std::string path = path_in(dir, kManifestName);
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open manifest: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::string& dir, const json& j) {
  std::ofstream out = open_out(path_in(dir, kManifestName));
  out << j.dump(2) << '\n';
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::Io, "cannot create directory " + dir + ": " + ec.message());
}

template <class T>
T get_field(const json& j, const char* key) {
  require(j.contains(key), ErrorCode::Io, std::string("manifest lacks field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("manifest field '") + key + "': " + e.what());
  }
}

}  // namespace

void write_mtx(const std::string& path, const SpMat& M) {
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  for (Index c = 0; c < M.outerSize(); ++c)
    for (SpMat::InnerIterator it(M, c); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt17(it.value()) << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "write failed: " + path);
}

void write_mtx(const std::string& path, const Mat& M) {
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) out << fmt17(M(i, j)) << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "write failed: " + path);
}

SpMat read_mtx_sparse(const std::string& path) {
  const MtxData d = read_mtx(path);
  SpMat M(d.rows, d.cols);
  M.setFromTriplets(d.entries.begin(), d.entries.end());
  M.makeCompressed();
  return M;
}

Mat read_mtx_dense(const std::string& path) {
  const MtxData d = read_mtx(path);
  Mat M = Mat::Zero(d.rows, d.cols);
  for (const auto& t : d.entries) M(t.row(), t.col()) += t.value();
  return M;
}

void save_system(const std::string& dir, const QBSystem& sys) {
  make_dir(dir);
  json j;
  j["kind"] = "full";
  j["n"] = sys.n();
  j["m"] = sys.m();
  j["p"] = sys.p();
  j["meta"] = sys.meta;
  write_mtx(path_in(dir, "A.mtx"), sys.A());
  j["A"] = "A.mtx";
  write_mtx(path_in(dir, "B.mtx"), sys.B());
  j["B"] = "B.mtx";
  write_mtx(path_in(dir, "C.mtx"), sys.C());
  j["C"] = "C.mtx";
  json Ns = json::array();
  for (std::size_t k = 0; k < sys.N().size(); ++k) {
    const std::string name = "N" + std::to_string(k + 1) + ".mtx";
    write_mtx(path_in(dir, name), sys.N()[k]);
    Ns.push_back(name);
  }
  j["N"] = Ns;
  if (sys.has_E()) {
    write_mtx(path_in(dir, "E.mtx"), *sys.E());
    j["E"] = "E.mtx";
  }
  json h;
  if (sys.H().storage() == Hessian::Storage::Matricized) {
    h["storage"] = "matricized";
    write_mtx(path_in(dir, "H.mtx"), sys.H().matricized());
    h["file"] = "H.mtx";
  } else {
    h["storage"] = "pairs";
    json pairs = json::array();
    for (std::size_t q = 0; q < sys.H().pairs().size(); ++q) {
      const std::string a = "H_A" + std::to_string(q + 1) + ".mtx";
      const std::string b = "H_B" + std::to_string(q + 1) + ".mtx";
      write_mtx(path_in(dir, a), sys.H().pairs()[q].A);
      write_mtx(path_in(dir, b), sys.H().pairs()[q].B);
      pairs.push_back(json::array({a, b}));
    }
    h["pairs"] = pairs;
  }
  j["H"] = h;
  write_manifest(dir, j);
}

QBSystem load_system(const std::string& dir) {
  const json j = read_manifest(dir);
  const std::string kind = get_field<std::string>(j, "kind");
  if (kind == "reduced") return load_reduced(dir).as_system();
  require(kind == "full", ErrorCode::Io, "unknown manifest kind '" + kind + "'");
  const Index n = get_field<Index>(j, "n");
  SpMat A = read_mtx_sparse(path_in(dir, get_field<std::string>(j, "A")));
  Mat B = read_mtx_dense(path_in(dir, get_field<std::string>(j, "B")));
  Mat C = read_mtx_dense(path_in(dir, get_field<std::string>(j, "C")));
  std::vector<SpMat> N;
  for (const auto& name : get_field<std::vector<std::string>>(j, "N")) N.push_back(read_mtx_sparse(path_in(dir, name)));
  std::optional<SpMat> E;
  if (j.contains("E")) E = read_mtx_sparse(path_in(dir, get_field<std::string>(j, "E")));
  const json h = get_field<json>(j, "H");
  const std::string storage = get_field<std::string>(h, "storage");
  Hessian H;
  if (storage == "matricized") {
    H = Hessian::from_matricized(read_mtx_sparse(path_in(dir, get_field<std::string>(h, "file"))));
  } else if (storage == "pairs") {
    std::vector<FactorPair> pairs;
    for (const auto& pr : get_field<std::vector<std::vector<std::string>>>(h, "pairs")) {
      require(pr.size() == 2, ErrorCode::Io, "Hessian pair entries must name two files");
      pairs.push_back({read_mtx_sparse(path_in(dir, pr[0])), read_mtx_sparse(path_in(dir, pr[1]))});
    }
    H = Hessian::from_pairs(n, std::move(pairs));
  } else {
    throw Error(ErrorCode::Io, "unknown Hessian storage '" + storage + "'");
  }
  require(A.rows() == n, ErrorCode::Io, "manifest n disagrees with A");
  QBSystem sys(std::move(A), std::move(H), std::move(N), std::move(B), std::move(C), std::move(E));
  if (j.contains("meta")) sys.meta = get_field<std::map<std::string, std::string>>(j, "meta");
  return sys;
}

void save_reduced(const std::string& dir, const ReducedModel& red) {
  make_dir(dir);
  json j;
  j["kind"] = "reduced";
  j["r"] = red.r();
  j["m"] = red.B.cols();
  j["p"] = red.C.rows();
  j["meta"] = red.meta;
  write_mtx(path_in(dir, "A.mtx"), red.A);
  write_mtx(path_in(dir, "H.mtx"), red.H);
  write_mtx(path_in(dir, "B.mtx"), red.B);
  write_mtx(path_in(dir, "C.mtx"), red.C);
  j["A"] = "A.mtx";
  j["H"] = "H.mtx";
  j["B"] = "B.mtx";
  j["C"] = "C.mtx";
  json Ns = json::array();
  for (std::size_t k = 0; k < red.N.size(); ++k) {
    const std::string name = "N" + std::to_string(k + 1) + ".mtx";
    write_mtx(path_in(dir, name), red.N[k]);
    Ns.push_back(name);
  }
  j["N"] = Ns;
  write_manifest(dir, j);
}

ReducedModel load_reduced(const std::string& dir) {
  const json j = read_manifest(dir);
  require(get_field<std::string>(j, "kind") == "reduced", ErrorCode::Io, "manifest does not describe a reduced model");
  ReducedModel red;
  red.A = read_mtx_dense(path_in(dir, get_field<std::string>(j, "A")));
  red.H = read_mtx_dense(path_in(dir, get_field<std::string>(j, "H")));
  red.B = read_mtx_dense(path_in(dir, get_field<std::string>(j, "B")));
  red.C = read_mtx_dense(path_in(dir, get_field<std::string>(j, "C")));
  for (const auto& name : get_field<std::vector<std::string>>(j, "N")) red.N.push_back(read_mtx_dense(path_in(dir, name)));
  const Index r = red.A.rows();
  require(red.A.cols() == r && red.H.rows() == r && red.H.cols() == r * r && red.B.rows() == r && red.C.cols() == r,
          ErrorCode::Io, "reduced model files have inconsistent dimensions");
  if (j.contains("meta")) red.meta = get_field<std::map<std::string, std::string>>(j, "meta");
  return red;
}

}  // namespace qbmor
