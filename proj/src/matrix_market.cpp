#include "fsidlm/matrix_market.hpp"

#include <cinttypes>
#include <cstdio>
#include <memory>

namespace fsidlm {

namespace {
struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open " + path);
    return f;
}
} // namespace

void write_matrix_market(const CsrMatrix& m, const std::string& path) {
    auto f = open_or_throw(path, "w");
    std::fprintf(f.get(), "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f.get(), "%d %d %zu\n", m.n_rows(), m.n_cols(), m.nnz());
    for (int r = 0; r < m.n_rows(); ++r)
        for (int k = m.row_ptr()[static_cast<std::size_t>(r)];
             k < m.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
            std::fprintf(f.get(), "%d %d %.17g\n", r + 1,
                         m.col_idx()[static_cast<std::size_t>(k)] + 1,
                         m.values()[static_cast<std::size_t>(k)]);
}

CsrMatrix read_matrix_market(const std::string& path) {
    auto f = open_or_throw(path, "r");
    char line[512];
    // Skip header and comment lines.
    do {
        if (!std::fgets(line, sizeof line, f.get())) throw IoError("truncated file " + path);
    } while (line[0] == '%');
    int rows = 0, cols = 0;
    long long nnz = 0;
    if (std::sscanf(line, "%d %d %lld", &rows, &cols, &nnz) != 3)
        throw IoError("bad size line in " + path);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (long long i = 0; i < nnz; ++i) {
        int r = 0, c = 0;
        double v = 0.0;
        if (std::fscanf(f.get(), "%d %d %lf", &r, &c, &v) != 3)
            throw IoError("bad entry in " + path);
        triplets.push_back({r - 1, c - 1, v});
    }
    return CsrMatrix::from_triplets(rows, cols, std::move(triplets));
}

void write_matrix_market_vector(const std::vector<double>& v, const std::string& path) {
    auto f = open_or_throw(path, "w");
    std::fprintf(f.get(), "%%%%MatrixMarket matrix array real general\n");
    std::fprintf(f.get(), "%zu 1\n", v.size());
    for (const double x : v) std::fprintf(f.get(), "%.17g\n", x);
}

std::vector<double> read_matrix_market_vector(const std::string& path) {
    auto f = open_or_throw(path, "r");
    char line[512];
    do {
        if (!std::fgets(line, sizeof line, f.get())) throw IoError("truncated file " + path);
    } while (line[0] == '%');
    long long n = 0;
    int one = 0;
    if (std::sscanf(line, "%lld %d", &n, &one) != 2) throw IoError("bad size line in " + path);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v)
        if (std::fscanf(f.get(), "%lf", &x) != 1) throw IoError("bad entry in " + path);
    return v;
}

} // namespace fsidlm
