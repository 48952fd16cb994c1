#ifndef EXLASSO_IO_HPP
#define EXLASSO_IO_HPP

//! Self-describing binary container for problem instances.
//!
//! Layout (little-endian, fixed-width fields; documented in docs/formats.md):
//!   magic "XLAS" | format version u32 | task u8 | storage u8 |
//!   m u64 | n u64 | A | b | weights | groups | x* flag + data | config echo.
//! The design matrix is stored dense row-major when at least a quarter of its
//! entries are nonzero and as CSR otherwise; either way it loads back into a
//! dense in-memory matrix (sparsity is a storage optimization only, the
//! solvers are dense in-core).  Doubles round-trip bit for bit, so a loaded
//! instance resaves byte-identically.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "exlasso/problem.hpp"

namespace exlasso {

inline constexpr std::uint32_t kInstanceMagic = 0x53414c58u;  // "XLAS" little-endian
inline constexpr std::uint32_t kInstanceVersion = 1u;
inline constexpr double kDenseStorageThreshold = 0.25;

struct InstanceFile {
  LossKind task = LossKind::least_squares;
  Matrix A;
  Vector b;
  Vector weights;                          // per-coordinate regularizer weights
  std::vector<std::vector<Index>> groups;  // 0-based coordinate lists
  std::optional<Vector> x_star;            // ground truth when known
  std::string config_echo;                 // JSON text recorded at generation
};

namespace detail {

template <typename T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("instance file truncated");
  return value;
}

inline void write_doubles(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
}

inline void read_doubles(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  if (!in) throw std::runtime_error("instance file truncated");
}

inline std::uint64_t checked_u64(std::istream& in, std::uint64_t cap, const char* what) {
  const auto v = read_pod<std::uint64_t>(in);
  if (v > cap) throw std::runtime_error(std::string("instance file field out of range: ") + what);
  return v;
}

}  // namespace detail

inline void save_instance(std::ostream& out, const InstanceFile& inst) {
  const Index m = inst.A.rows();
  const Index n = inst.A.cols();
  if (inst.b.size() != m) throw std::invalid_argument("save_instance: b has wrong dimension");
  if (inst.weights.size() != n)
    throw std::invalid_argument("save_instance: weights have wrong dimension");
  if (inst.x_star && inst.x_star->size() != n)
    throw std::invalid_argument("save_instance: x_star has wrong dimension");

  detail::write_pod(out, kInstanceMagic);
  detail::write_pod(out, kInstanceVersion);
  detail::write_pod(out, static_cast<std::uint8_t>(inst.task == LossKind::logistic ? 1 : 0));

  std::uint64_t nnz = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (inst.A(i, j) != 0.0) ++nnz;
  const bool dense =
      m == 0 || n == 0 ||
      static_cast<double>(nnz) >= kDenseStorageThreshold * static_cast<double>(m) *
                                      static_cast<double>(n);
  detail::write_pod(out, static_cast<std::uint8_t>(dense ? 0 : 1));
  detail::write_pod(out, static_cast<std::uint64_t>(m));
  detail::write_pod(out, static_cast<std::uint64_t>(n));

  if (dense) {
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) detail::write_pod(out, inst.A(i, j));
  } else {
    detail::write_pod(out, nnz);
    std::uint64_t running = 0;
    detail::write_pod(out, running);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j)
        if (inst.A(i, j) != 0.0) ++running;
      detail::write_pod(out, running);
    }
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j)
        if (inst.A(i, j) != 0.0) detail::write_pod(out, static_cast<std::uint64_t>(j));
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j)
        if (inst.A(i, j) != 0.0) detail::write_pod(out, inst.A(i, j));
  }

  detail::write_doubles(out, inst.b.data(), static_cast<std::size_t>(m));
  detail::write_doubles(out, inst.weights.data(), static_cast<std::size_t>(n));

  detail::write_pod(out, static_cast<std::uint64_t>(inst.groups.size()));
  for (const auto& g : inst.groups) {
    detail::write_pod(out, static_cast<std::uint64_t>(g.size()));
    for (Index i : g) detail::write_pod(out, static_cast<std::uint64_t>(i));
  }

  detail::write_pod(out, static_cast<std::uint8_t>(inst.x_star ? 1 : 0));
  if (inst.x_star) detail::write_doubles(out, inst.x_star->data(), static_cast<std::size_t>(n));

  detail::write_pod(out, static_cast<std::uint64_t>(inst.config_echo.size()));
  out.write(inst.config_echo.data(), static_cast<std::streamsize>(inst.config_echo.size()));
  if (!out) throw std::runtime_error("save_instance: write failed");
}

inline InstanceFile load_instance(std::istream& in) {
  if (detail::read_pod<std::uint32_t>(in) != kInstanceMagic)
    throw std::runtime_error("not an instance file (bad magic)");
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != kInstanceVersion)
    throw std::runtime_error("unsupported instance format version " + std::to_string(version));

  InstanceFile inst;
  const auto task = detail::read_pod<std::uint8_t>(in);
  if (task > 1) throw std::runtime_error("instance file field out of range: task");
  inst.task = task == 1 ? LossKind::logistic : LossKind::least_squares;
  const auto storage = detail::read_pod<std::uint8_t>(in);
  if (storage > 1) throw std::runtime_error("instance file field out of range: storage");

  constexpr std::uint64_t kDimCap = std::uint64_t{1} << 32;
  const auto m = static_cast<Index>(detail::checked_u64(in, kDimCap, "m"));
  const auto n = static_cast<Index>(detail::checked_u64(in, kDimCap, "n"));

  inst.A = Matrix::Zero(m, n);
  if (storage == 0) {
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) inst.A(i, j) = detail::read_pod<double>(in);
  } else {
    const auto nnz = detail::checked_u64(in, static_cast<std::uint64_t>(m) * n, "nnz");
    std::vector<std::uint64_t> row_ptr(static_cast<std::size_t>(m) + 1);
    for (auto& r : row_ptr) r = detail::checked_u64(in, nnz, "row_ptr");
    if (row_ptr.front() != 0 || row_ptr.back() != nnz)
      throw std::runtime_error("instance file field out of range: row_ptr ends");
    std::vector<std::uint64_t> col(static_cast<std::size_t>(nnz));
    for (auto& c : col) c = detail::checked_u64(in, static_cast<std::uint64_t>(n) - 1, "col");
    for (Index i = 0; i < m; ++i) {
      if (row_ptr[static_cast<std::size_t>(i) + 1] < row_ptr[static_cast<std::size_t>(i)])
        throw std::runtime_error("instance file field out of range: row_ptr order");
    }
    std::size_t k = 0;
    for (Index i = 0; i < m; ++i)
      for (std::uint64_t r = row_ptr[static_cast<std::size_t>(i)];
           r < row_ptr[static_cast<std::size_t>(i) + 1]; ++r, ++k)
        inst.A(i, static_cast<Index>(col[k])) = detail::read_pod<double>(in);
  }

  inst.b.resize(m);
  detail::read_doubles(in, inst.b.data(), static_cast<std::size_t>(m));
  inst.weights.resize(n);
  detail::read_doubles(in, inst.weights.data(), static_cast<std::size_t>(n));

  const auto n_groups = detail::checked_u64(in, static_cast<std::uint64_t>(n), "group count");
  inst.groups.resize(static_cast<std::size_t>(n_groups));
  for (auto& g : inst.groups) {
    const auto len = detail::checked_u64(in, static_cast<std::uint64_t>(n), "group size");
    g.resize(static_cast<std::size_t>(len));
    for (auto& i : g)
      i = static_cast<Index>(detail::checked_u64(in, static_cast<std::uint64_t>(n) - 1, "index"));
  }

  if (detail::read_pod<std::uint8_t>(in) == 1) {
    Vector xs(n);
    detail::read_doubles(in, xs.data(), static_cast<std::size_t>(n));
    inst.x_star = std::move(xs);
  }

  const auto echo_len = detail::checked_u64(in, std::uint64_t{1} << 30, "config echo length");
  inst.config_echo.resize(static_cast<std::size_t>(echo_len));
  in.read(inst.config_echo.data(), static_cast<std::streamsize>(echo_len));
  if (!in) throw std::runtime_error("instance file truncated");
  return inst;
}

inline void save_instance(const std::string& path, const InstanceFile& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  save_instance(out, inst);
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return load_instance(in);
}

inline GroupPartition instance_partition(const InstanceFile& inst) {
  return GroupPartition(inst.groups, inst.weights);
}

inline ProblemSpec instance_problem(const InstanceFile& inst, double lambda) {
  LossModel loss = inst.task == LossKind::logistic ? LossModel::logistic(inst.b)
                                                   : LossModel::least_squares(inst.b);
  return make_problem(inst.A, std::move(loss), lambda, instance_partition(inst));
}

}  // namespace exlasso

#endif  // EXLASSO_IO_HPP
