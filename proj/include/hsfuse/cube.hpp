#pragma once

// Raster cube data model plus file I/O.
//
// Cube container on disk is a two-file pair <name>.hdr / <name>.bin. The
// header is UTF-8 key/value text (height, width, bands, dtype=f32le, optional
// comma-separated wavelengths in nm). The payload is little-endian IEEE-754
// float32, row-major, band-interleaved-by-pixel.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsfuse {

struct DataCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    std::vector<float> values;               // pixel-major, band fastest
    std::vector<double> wavelengths;         // empty or size == bands, strictly increasing

    DataCube() = default;
    DataCube(int h, int w, int b)
        : height(h), width(w), bands(b),
          values(static_cast<size_t>(h) * w * b, 0.0f) {}

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
    size_t index(int i, int j, int k) const {
        return (static_cast<size_t>(i) * width + j) * bands + k;
    }
    float& at(int i, int j, int k) { return values[index(i, j, k)]; }
    float at(int i, int j, int k) const { return values[index(i, j, k)]; }

    void validate() const {
        if (height <= 0 || width <= 0 || bands <= 0)
            throw std::invalid_argument("cube: non-positive dimension");
        if (values.size() != static_cast<size_t>(height) * width * bands)
            throw std::invalid_argument("cube: value count does not match dimensions");
        if (!wavelengths.empty()) {
            if (static_cast<int>(wavelengths.size()) != bands)
                throw std::invalid_argument("cube: wavelength count does not match bands");
            for (size_t i = 1; i < wavelengths.size(); ++i)
                if (!(wavelengths[i] > wavelengths[i - 1]))
                    throw std::invalid_argument("cube: wavelengths not strictly increasing");
        }
    }
};

struct SrfMatrix {
    Eigen::MatrixXd weights;  // C x c, nonnegative

    int input_bands() const { return static_cast<int>(weights.rows()); }
    int output_bands() const { return static_cast<int>(weights.cols()); }

    void validate() const {
        if (weights.rows() < 1 || weights.cols() < 1)
            throw std::invalid_argument("srf: empty matrix");
        if ((weights.array() < 0.0).any())
            throw std::invalid_argument("srf: negative entry");
        for (int m = 0; m < weights.cols(); ++m)
            if (weights.col(m).maxCoeff() <= 0.0)
                throw std::invalid_argument("srf: column with no positive entry");
    }

    static SrfMatrix identity(int bands) {
        SrfMatrix r;
        r.weights = Eigen::MatrixXd::Identity(bands, bands);
        return r;
    }
};

struct CropSpec {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;
};

namespace detail {

inline std::string strip_cube_ext(const std::string& path) {
    for (const char* ext : {".hdr", ".bin"}) {
        if (path.size() > 4 && path.compare(path.size() - 4, 4, ext) == 0)
            return path.substr(0, path.size() - 4);
    }
    return path;
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

inline void save_cube(const DataCube& cube, const std::string& path,
                      const std::map<std::string, std::string>& extra_header = {}) {
    cube.validate();
    const std::string base = detail::strip_cube_ext(path);
    {
        std::ofstream hdr(base + ".hdr");
        if (!hdr) throw std::runtime_error("save_cube: cannot open " + base + ".hdr");
        hdr << "height=" << cube.height << "\n";
        hdr << "width=" << cube.width << "\n";
        hdr << "bands=" << cube.bands << "\n";
        hdr << "dtype=f32le\n";
        if (!cube.wavelengths.empty()) {
            hdr << "wavelengths=";
            for (size_t i = 0; i < cube.wavelengths.size(); ++i) {
                if (i) hdr << ",";
                hdr.precision(17);
                hdr << cube.wavelengths[i];
            }
            hdr << "\n";
        }
        for (const auto& [k, v] : extra_header) hdr << k << "=" << v << "\n";
        if (!hdr) throw std::runtime_error("save_cube: write failed on " + base + ".hdr");
    }
    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("save_cube: cannot open " + base + ".bin");
    static_assert(sizeof(float) == 4);
    bin.write(reinterpret_cast<const char*>(cube.values.data()),
              static_cast<std::streamsize>(cube.values.size() * sizeof(float)));
    if (!bin) throw std::runtime_error("save_cube: write failed on " + base + ".bin");
}

inline DataCube load_cube(const std::string& path) {
    const std::string base = detail::strip_cube_ext(path);
    std::ifstream hdr(base + ".hdr");
    if (!hdr) throw std::runtime_error("load_cube: cannot open " + base + ".hdr");
    DataCube cube;
    bool have_h = false, have_w = false, have_b = false;
    std::string line;
    while (std::getline(hdr, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("load_cube: malformed header line: " + line);
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key == "height") { cube.height = std::stoi(val); have_h = true; }
        else if (key == "width") { cube.width = std::stoi(val); have_w = true; }
        else if (key == "bands") { cube.bands = std::stoi(val); have_b = true; }
        else if (key == "dtype") {
            if (val != "f32le")
                throw std::runtime_error("load_cube: unsupported dtype " + val);
        } else if (key == "wavelengths") {
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ','))
                cube.wavelengths.push_back(std::stod(tok));
        }
        // unknown keys (e.g. provenance) are ignored
    }
    if (!have_h || !have_w || !have_b)
        throw std::runtime_error("load_cube: header missing height/width/bands");
    if (cube.height <= 0 || cube.width <= 0 || cube.bands <= 0)
        throw std::runtime_error("load_cube: non-positive dimension in header");

    std::ifstream bin(base + ".bin", std::ios::binary | std::ios::ate);
    if (!bin) throw std::runtime_error("load_cube: cannot open " + base + ".bin");
    const auto nbytes = static_cast<size_t>(bin.tellg());
    const size_t expect = static_cast<size_t>(cube.height) * cube.width * cube.bands;
    if (nbytes != expect * sizeof(float))
        throw std::runtime_error("load_cube: payload size mismatch (header says " +
                                 std::to_string(expect) + " values, file has " +
                                 std::to_string(nbytes / sizeof(float)) + ")");
    bin.seekg(0);
    cube.values.resize(expect);
    bin.read(reinterpret_cast<char*>(cube.values.data()),
             static_cast<std::streamsize>(expect * sizeof(float)));
    if (!bin) throw std::runtime_error("load_cube: read failed");
    cube.validate();
    return cube;
}

// Global affine rescale of the whole cube to [0,1].
inline DataCube normalize_unit(const DataCube& cube) {
    cube.validate();
    float lo = std::numeric_limits<float>::max();
    float hi = std::numeric_limits<float>::lowest();
    for (float v : cube.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo))
        throw std::invalid_argument("normalize_unit: constant cube");
    DataCube out = cube;
    const double scale = 1.0 / (static_cast<double>(hi) - lo);
    for (float& v : out.values)
        v = static_cast<float>((static_cast<double>(v) - lo) * scale);
    return out;
}

// N x C pixel matrix, row n = spectrum of pixel n in row-major spatial order.
inline Eigen::MatrixXd flatten(const DataCube& cube) {
    Eigen::MatrixXd m(cube.pixel_count(), cube.bands);
    for (size_t n = 0; n < cube.pixel_count(); ++n)
        for (int k = 0; k < cube.bands; ++k)
            m(static_cast<Eigen::Index>(n), k) = cube.values[n * cube.bands + k];
    return m;
}

inline DataCube unflatten(const Eigen::MatrixXd& m, int height, int width) {
    if (m.rows() != static_cast<Eigen::Index>(height) * width)
        throw std::invalid_argument("unflatten: row count does not match spatial dims");
    DataCube cube(height, width, static_cast<int>(m.cols()));
    for (size_t n = 0; n < cube.pixel_count(); ++n)
        for (int k = 0; k < cube.bands; ++k)
            cube.values[n * cube.bands + k] = static_cast<float>(m(static_cast<Eigen::Index>(n), k));
    return cube;
}

// Spectral projection: out(i,j,m) = sum_n cube(i,j,n) * srf(n,m).
inline DataCube apply_srf(const DataCube& cube, const SrfMatrix& srf) {
    srf.validate();
    if (cube.bands != srf.input_bands())
        throw std::invalid_argument("apply_srf: band count mismatch");
    const int c = srf.output_bands();
    DataCube out(cube.height, cube.width, c);
    for (size_t n = 0; n < cube.pixel_count(); ++n) {
        const float* px = cube.values.data() + n * cube.bands;
        float* qx = out.values.data() + n * c;
        for (int m = 0; m < c; ++m) {
            double s = 0.0;
            for (int k = 0; k < cube.bands; ++k) s += px[k] * srf.weights(k, m);
            qx[m] = static_cast<float>(s);
        }
    }
    return out;
}

inline DataCube crop(const DataCube& cube, const CropSpec& spec) {
    if (spec.rows <= 0 || spec.cols <= 0 || spec.row0 < 0 || spec.col0 < 0 ||
        spec.row0 + spec.rows > cube.height || spec.col0 + spec.cols > cube.width)
        throw std::invalid_argument("crop: spec does not fit inside cube");
    DataCube out(spec.rows, spec.cols, cube.bands);
    out.wavelengths = cube.wavelengths;
    for (int i = 0; i < spec.rows; ++i)
        for (int j = 0; j < spec.cols; ++j)
            for (int k = 0; k < cube.bands; ++k)
                out.at(i, j, k) = cube.at(spec.row0 + i, spec.col0 + j, k);
    return out;
}

// Disjoint 32-aligned train/test rectangles, partitioned along the longer
// spatial axis. Extents truncate to the nearest lower multiple of 32.
inline std::pair<CropSpec, CropSpec> split_train_test(const DataCube& cube,
                                                      double fraction = 0.75) {
    const bool along_rows = cube.height >= cube.width;
    const int axis = along_rows ? cube.height : cube.width;
    const int other = along_rows ? cube.width : cube.height;
    const int axis32 = (axis / 32) * 32;
    const int other32 = (other / 32) * 32;
    const int train = static_cast<int>(axis32 * fraction / 32) * 32;
    const int test = axis32 - train;
    if (train < 32 || test < 32 || other32 < 32)
        throw std::invalid_argument("split_train_test: cube too small for 32-aligned split");
    CropSpec tr, te;
    if (along_rows) {
        tr = {0, 0, train, other32};
        te = {train, 0, test, other32};
    } else {
        tr = {0, 0, other32, train};
        te = {0, train, other32, test};
    }
    return {tr, te};
}

// SRF CSV: C rows x c columns, optional header row.
inline SrfMatrix load_srf_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_srf_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        bool numeric = true;
        while (std::getline(ss, tok, ',')) {
            try {
                size_t pos = 0;
                row.push_back(std::stod(detail::trim(tok), &pos));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) { first = false; continue; }  // header row
            throw std::runtime_error("load_srf_csv: non-numeric row in " + path);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("load_srf_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_srf_csv: empty file " + path);
    SrfMatrix srf;
    srf.weights.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows.front().size(); ++j)
            srf.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    srf.validate();
    return srf;
}

inline void save_srf_csv(const SrfMatrix& srf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_srf_csv: cannot open " + path);
    out.precision(17);
    for (int i = 0; i < srf.weights.rows(); ++i) {
        for (int j = 0; j < srf.weights.cols(); ++j) {
            if (j) out << ",";
            out << srf.weights(i, j);
        }
        out << "\n";
    }
}

// Gaussian-bump response curves spread evenly over the band axis; a standard
// stand-in when a sensor's measured SRF is unavailable.
inline SrfMatrix make_gaussian_srf(int hsi_bands, int msi_bands) {
    if (hsi_bands < 1 || msi_bands < 1 || msi_bands > hsi_bands)
        throw std::invalid_argument("make_gaussian_srf: invalid band counts");
    SrfMatrix srf;
    srf.weights.setZero(hsi_bands, msi_bands);
    const double sigma = std::max(1.0, hsi_bands / (2.5 * msi_bands));
    for (int m = 0; m < msi_bands; ++m) {
        const double center = (m + 0.5) * hsi_bands / msi_bands - 0.5;
        double sum = 0.0;
        for (int k = 0; k < hsi_bands; ++k) {
            const double d = (k - center) / sigma;
            const double w = std::exp(-0.5 * d * d);
            srf.weights(k, m) = w;
            sum += w;
        }
        srf.weights.col(m) /= sum;
    }
    srf.validate();
    return srf;
}

}  // namespace hsfuse
