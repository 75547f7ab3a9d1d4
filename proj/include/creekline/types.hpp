#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace creekline {

/// Dense row-major pixel plane. Row 0 is the top of the image; a larger
/// row index is lower in the scene.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale image with intensities in [0, 1].
using GrayImage = Plane<double>;

using BytePlane = Plane<std::uint8_t>;

using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rectangle or placement falls outside its host image.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// An image is too small for the requested operation.
class SizeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// External file could not be ingested; carries the offending path.
class IngestError : public Error {
public:
    IngestError(const std::string& path, const std::string& what)
        : Error(what + " [" + path + "]"), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Too few data points to produce an estimate.
class InsufficientSupportError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Axis-aligned rectangle in pixel coordinates. x is a column index, y a row
/// index; (x, y) is the top-left corner.
struct Rect {
    Index x = 0;
    Index y = 0;
    Index width = 0;
    Index height = 0;

    bool operator==(const Rect&) const = default;
};

/// Throws BoundsError naming the violating edge if `roi` is not fully inside
/// a host of the given dimensions, or if it is degenerate.
void require_inside(const Rect& roi, Index host_width, Index host_height,
                    const std::string& what);

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// 8-bit RGB image stored as three channel planes of equal shape.
struct ColorImage {
    BytePlane r;
    BytePlane g;
    BytePlane b;

    Index width() const { return r.cols(); }
    Index height() const { return r.rows(); }

    static ColorImage constant(Index width, Index height, std::uint8_t red,
                               std::uint8_t green, std::uint8_t blue);
};

enum class EdgeSource { sobel, canny, external };

std::string to_string(EdgeSource s);

/// Edge-strength map in [0, 1] with recorded provenance.
struct EdgeMap {
    GrayImage values;
    EdgeSource source = EdgeSource::external;

    Index width() const { return values.cols(); }
    Index height() const { return values.rows(); }
};

// ---------------------------------------------------------------------------
// Deterministic RNG
// ---------------------------------------------------------------------------

/// Seeded pseudorandom generator. Backed by std::mt19937_64; the uniform and
/// normal samplers below are hand-rolled on top of the raw 64-bit stream so
/// that equal seeds give equal sample sequences on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform real in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n). Multiply-high mapping of the full 64-bit
    /// word; bias is below 2^-64 for any n that fits an image.
    std::uint64_t index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Gaussian sample via Box-Muller. Draws a fresh pair per call.
    double normal(double mean, double sigma);

private:
    std::mt19937_64 engine_;
};

/// FNV-1a hash of a string, used to derive stable per-item seeds.
std::uint64_t fnv1a(const std::string& text);

}  // namespace creekline
