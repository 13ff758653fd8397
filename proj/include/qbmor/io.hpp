/// \file io.hpp
/// \brief Serialization of full and reduced QB systems: a JSON manifest that
///        names dimensions and per-matrix files, with matrices stored in
///        MatrixMarket coordinate (sparse) or array (dense) format using 17
///        significant digits, so that binary64 values round-trip exactly.
#ifndef QBMOR_IO_HPP
#define QBMOR_IO_HPP

#include <string>

#include <qbmor/qb_core.hpp>

namespace qbmor {

/// \brief Writes a sparse matrix in MatrixMarket coordinate real general format.
void write_mtx(const std::string& path, const SpMat& M);
/// \brief Writes a dense matrix in MatrixMarket array real general format.
void write_mtx(const std::string& path, const Mat& M);
/// \brief Reads a MatrixMarket file (coordinate or array) as a sparse matrix.
/// \throws Error(Io) on unreadable or malformed files.
SpMat read_mtx_sparse(const std::string& path);
/// \brief Reads a MatrixMarket file (coordinate or array) as a dense matrix.
Mat read_mtx_dense(const std::string& path);

/// \brief Name of the manifest file inside a model directory.
inline constexpr const char* kManifestName = "manifest.json";

/// \brief Saves a full system into directory dir (created if missing).
///        Structured Hessians are written as factor pairs, matricized ones as
///        a single n×n² coordinate file.
void save_system(const std::string& dir, const QBSystem& sys);
/// \brief Loads a system saved by save_system (or a reduced model, which is
///        returned as a small QBSystem).
QBSystem load_system(const std::string& dir);

/// \brief Saves a reduced model (dense array files) into directory dir.
void save_reduced(const std::string& dir, const ReducedModel& red);
/// \brief Loads a reduced model saved by save_reduced.
ReducedModel load_reduced(const std::string& dir);

}  // namespace qbmor

#endif  // QBMOR_IO_HPP
