#include "fockforge/serialization.hpp"

#include <stdexcept>

#include <json.hpp>

namespace fockforge {

namespace {

using nlohmann::json;

constexpr const char* kBasisTag = "nH,nV row-major";

json grids_to_doc(int cutoff, const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) {
    json re_rows = json::array();
    json im_rows = json::array();
    for (Eigen::Index r = 0; r < re.rows(); ++r) {
        json re_row = json::array();
        json im_row = json::array();
        for (Eigen::Index c = 0; c < re.cols(); ++c) {
            re_row.push_back(re(r, c));
            im_row.push_back(im(r, c));
        }
        re_rows.push_back(std::move(re_row));
        im_rows.push_back(std::move(im_row));
    }
    json doc;
    doc["cutoff"] = cutoff;
    doc["basis"] = kBasisTag;
    doc["re"] = std::move(re_rows);
    doc["im"] = std::move(im_rows);
    return doc;
}

struct ParsedDoc {
    int cutoff;
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;
};

ParsedDoc parse_doc(const std::string& text, int expected_rows_per_side) {
    json doc = json::parse(text);
    if (!doc.contains("cutoff") || !doc.contains("basis") || !doc.contains("re") ||
        !doc.contains("im"))
        throw std::invalid_argument("state document missing a required key");
    if (doc["basis"].get<std::string>() != kBasisTag)
        throw std::invalid_argument("unexpected basis tag: " +
                                    doc["basis"].get<std::string>());
    int cutoff = doc["cutoff"].get<int>();
    if (cutoff < 0)
        throw std::invalid_argument("negative cutoff");
    int side = cutoff + 1;
    Eigen::Index rows = expected_rows_per_side == 1 ? side : side * side;
    Eigen::Index cols = rows;

    auto read_grid = [&](const json& grid) {
        if (static_cast<Eigen::Index>(grid.size()) != rows)
            throw std::invalid_argument("grid row count does not match cutoff");
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const json& row = grid.at(r);
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw std::invalid_argument("grid column count does not match cutoff");
            for (Eigen::Index c = 0; c < cols; ++c)
                m(r, c) = row.at(c).get<double>();
        }
        return m;
    };

    return {cutoff, read_grid(doc["re"]), read_grid(doc["im"])};
}

} // namespace

std::string state_to_json(const FockVector& psi) {
    int side = psi.side();
    Eigen::MatrixXd re(side, side), im(side, side);
    for (int h = 0; h < side; ++h)
        for (int v = 0; v < side; ++v) {
            re(h, v) = psi.at(h, v).real();
            im(h, v) = psi.at(h, v).imag();
        }
    return grids_to_doc(psi.cutoff, re, im).dump();
}

FockVector state_from_json(const std::string& text) {
    ParsedDoc doc = parse_doc(text, 1);
    FockVector psi(doc.cutoff);
    for (int h = 0; h <= doc.cutoff; ++h)
        for (int v = 0; v <= doc.cutoff; ++v)
            psi.at(h, v) = {doc.re(h, v), doc.im(h, v)};
    return psi;
}

std::string density_to_json(const DensityMatrix& rho) {
    return grids_to_doc(rho.cutoff, rho.mat.real(), rho.mat.imag()).dump();
}

DensityMatrix density_from_json(const std::string& text) {
    ParsedDoc doc = parse_doc(text, 2);
    DensityMatrix rho(doc.cutoff);
    rho.mat = doc.re.cast<std::complex<double>>() +
              std::complex<double>(0.0, 1.0) * doc.im.cast<std::complex<double>>();
    return rho;
}

} // namespace fockforge
