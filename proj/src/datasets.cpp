#include "semidiff/datasets.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace semidiff {

void LabeledDataset::validate() const {
    if (x.cols() != y.cols()) throw std::invalid_argument("labeled dataset: x/y column mismatch");
    if (x.cols() < 1) throw std::invalid_argument("labeled dataset: at least one pair required");
    if ((y.array() < 0.0).any() || (y.array() > 1.0).any())
        throw std::invalid_argument("labeled dataset: conditions must lie in [0,1]^d_y");
}

PseudoDataset PseudoDataset::head(Eigen::Index n) const {
    if (n > size()) throw std::invalid_argument("pseudo dataset: head larger than dataset");
    PseudoDataset out = *this;
    out.x = x.leftCols(n);
    out.y = y.leftCols(n);
    out.accepted.resize(static_cast<std::size_t>(n));
    out.retries.resize(static_cast<std::size_t>(n));
    out.provenance.accepted = 0;
    out.provenance.attempts = 0;
    out.provenance.clipped = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.provenance.attempts += 1 + static_cast<std::size_t>(out.retries[static_cast<std::size_t>(i)]);
        if (out.accepted[static_cast<std::size_t>(i)]) ++out.provenance.accepted;
        else ++out.provenance.clipped;
    }
    return out;
}

void write_pseudo_csv(const PseudoDataset& data, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "task";
    for (Eigen::Index r = 0; r < data.y.rows(); ++r) f << ",y" << r;
    for (Eigen::Index r = 0; r < data.x.rows(); ++r) f << ",x" << r;
    f << ",accepted,retries\n";
    f << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        f << data.task;
        for (Eigen::Index r = 0; r < data.y.rows(); ++r) f << ',' << data.y(r, i);
        for (Eigen::Index r = 0; r < data.x.rows(); ++r) f << ',' << data.x(r, i);
        const auto si = static_cast<std::size_t>(i);
        f << ',' << (si < data.accepted.size() ? int(data.accepted[si]) : 1) << ','
          << (si < data.retries.size() ? data.retries[si] : 0) << '\n';
    }
}

PseudoDataset read_pseudo_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(f, line);
    int d_y = 0, d_x = 0;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.size() > 1 && col[0] == 'y') ++d_y;
            if (col.size() > 1 && col[0] == 'x') ++d_x;
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> r;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        if (r.size() != static_cast<std::size_t>(3 + d_x + d_y)) throw std::runtime_error("malformed row in " + path);
        rows.push_back(std::move(r));
    }
    PseudoDataset out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.x.resize(d_x, n);
    out.y.resize(d_y, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        out.task = static_cast<int>(r[0]);
        for (int j = 0; j < d_y; ++j) out.y(j, i) = r[static_cast<std::size_t>(1 + j)];
        for (int j = 0; j < d_x; ++j) out.x(j, i) = r[static_cast<std::size_t>(1 + d_y + j)];
        out.accepted.push_back(static_cast<char>(r[static_cast<std::size_t>(1 + d_y + d_x)]));
        out.retries.push_back(static_cast<int>(r[static_cast<std::size_t>(2 + d_y + d_x)]));
    }
    return out;
}

}  // namespace semidiff
