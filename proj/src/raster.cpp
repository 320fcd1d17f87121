#include "geoinfer/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geoinfer/errors.hpp"
#include "geoinfer/numformat.hpp"

namespace geoinfer {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

Raster load_ascii_grid(const std::string& path, RasterKind kind) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open raster: " + path);

    Raster r;
    r.kind = kind;
    std::map<std::string, double> header;
    for (int i = 0; i < 6; ++i) {
        std::string key;
        double value;
        if (!(in >> key >> value)) throw ParseError(path + ": truncated ASCII grid header");
        header[lower(key)] = value;
    }
    for (const char* key : {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"}) {
        if (!header.count(key)) throw ParseError(path + ": missing header field " + key);
    }
    r.ncols = static_cast<int>(header["ncols"]);
    r.nrows = static_cast<int>(header["nrows"]);
    r.xllcorner = header["xllcorner"];
    r.yllcorner = header["yllcorner"];
    r.cellsize = header["cellsize"];
    r.nodata_value = header.count("nodata_value") ? header["nodata_value"] : -9999.0;
    if (r.ncols <= 0 || r.nrows <= 0 || r.cellsize <= 0.0) {
        throw ParseError(path + ": non-positive grid dimensions or cellsize");
    }

    const std::size_t n = static_cast<std::size_t>(r.ncols) * r.nrows;
    r.cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> r.cells[i])) throw ParseError(path + ": truncated cell data");
        if (kind == RasterKind::categorical && !r.is_nodata(r.cells[i]) &&
            r.cells[i] != std::floor(r.cells[i])) {
            throw ParseError(path + ": non-integer cell in categorical raster");
        }
    }
    return r;
}

void save_ascii_grid(const std::string& path, const Raster& r) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write raster: " + path);
    out << "ncols " << r.ncols << "\n"
        << "nrows " << r.nrows << "\n"
        << "xllcorner " << format_roundtrip(r.xllcorner) << "\n"
        << "yllcorner " << format_roundtrip(r.yllcorner) << "\n"
        << "cellsize " << format_roundtrip(r.cellsize) << "\n"
        << "NODATA_value " << format_roundtrip(r.nodata_value) << "\n";
    for (int row = 0; row < r.nrows; ++row) {
        for (int col = 0; col < r.ncols; ++col) {
            if (col) out << ' ';
            out << format_roundtrip(r.at(row, col));
        }
        out << '\n';
    }
}

int Legend::code_for(const std::string& name) const {
    for (const auto& [code, n] : code_to_name) {
        if (n == name) return code;
    }
    return -1;
}

Legend load_legend(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open legend: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    Legend legend;
    for (auto it = j.begin(); it != j.end(); ++it) {
        legend.code_to_name[std::stoi(it.key())] = it.value().get<std::string>();
    }
    return legend;
}

void save_legend(const std::string& path, const Legend& legend) {
    nlohmann::json j;
    for (const auto& [code, name] : legend.code_to_name) j[std::to_string(code)] = name;
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

void remap_legend_nodata(Raster& r, const Legend& legend) {
    const int nodata_code = legend.code_for("nodata");
    if (nodata_code < 0) return;
    for (double& v : r.cells) {
        if (v == static_cast<double>(nodata_code)) v = r.nodata_value;
    }
}

namespace {

// Column range [begin, end) of cell centers falling in the half-open span
// [x_lo, x_hi). Boundaries are nudged by direct center comparison so the
// result is bit-identical to testing each center individually.
std::pair<int, int> span_columns(const Raster& r, double x_lo, double x_hi) {
    auto center = [&](int c) { return r.xllcorner + (c + 0.5) * r.cellsize; };
    int begin = static_cast<int>(std::floor((x_lo - r.xllcorner) / r.cellsize - 0.5));
    begin = std::clamp(begin - 1, 0, r.ncols);
    while (begin < r.ncols && center(begin) < x_lo) ++begin;
    int end = static_cast<int>(std::ceil((x_hi - r.xllcorner) / r.cellsize - 0.5));
    end = std::clamp(end + 1, begin, r.ncols);
    while (end > begin && center(end - 1) >= x_hi) --end;
    return {begin, end};
}

// x positions where polygon edges cross the horizontal line at latitude y,
// using the same crossing rule and interpolation as point_in_polygon.
void row_crossings(const geo::Geometry& g, double y, std::vector<double>& xs) {
    xs.clear();
    auto scan_ring = [&](const geo::Ring& ring) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const auto& a = ring[i];
            const auto& b = ring[i + 1];
            if ((a.lat > y) == (b.lat > y)) continue;
            const double t = (y - a.lat) / (b.lat - a.lat);
            xs.push_back(a.lon + t * (b.lon - a.lon));
        }
    };
    for (const auto& part : g.parts) {
        scan_ring(part.outer);
        for (const auto& hole : part.holes) scan_ring(hole);
    }
    std::sort(xs.begin(), xs.end());
}

template <typename CellFn>
void for_each_inside_cell(const Raster& r, const geo::Geometry& g, int row,
                          std::vector<double>& xs, CellFn&& fn) {
    const double y = r.yllcorner + (r.nrows - row - 0.5) * r.cellsize;
    row_crossings(g, y, xs);
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const auto [begin, end] = span_columns(r, xs[k], xs[k + 1]);
        for (int col = begin; col < end; ++col) fn(col);
    }
}

struct RowPartial {
    double sum = 0.0;
    long count = 0;
    long class_count = 0;
};

template <typename RowFn>
void parallel_rows(const Raster& r, const geo::Geometry& g, std::vector<RowPartial>& partials,
                   RowFn&& fn) {
    partials.assign(static_cast<std::size_t>(r.nrows), RowPartial{});
    const geo::BBox box = geo::bounding_box(g);
#pragma omp parallel
    {
        std::vector<double> xs;
#pragma omp for schedule(dynamic, 16)
        for (int row = 0; row < r.nrows; ++row) {
            const double y = r.yllcorner + (r.nrows - row - 0.5) * r.cellsize;
            if (y < box.min_lat || y > box.max_lat) continue;
            fn(row, xs, partials[static_cast<std::size_t>(row)]);
        }
    }
}

}  // namespace

ZonalStats zonal_stats(const Raster& r, const geo::Geometry& g) {
    std::vector<RowPartial> partials;
    parallel_rows(r, g, partials, [&](int row, std::vector<double>& xs, RowPartial& p) {
        for_each_inside_cell(r, g, row, xs, [&](int col) {
            const double v = r.at(row, col);
            if (r.is_nodata(v)) return;
            p.sum += v;
            p.count += 1;
        });
    });
    ZonalStats out;
    for (const auto& p : partials) {
        out.sum += p.sum;
        out.valid_cell_count += p.count;
    }
    out.mean = out.valid_cell_count > 0 ? out.sum / static_cast<double>(out.valid_cell_count) : 0.0;
    out.warning = out.valid_cell_count == 0;
    return out;
}

ClassRatio class_ratio(const Raster& r, const geo::Geometry& g, int class_code) {
    const double code = static_cast<double>(class_code);
    std::vector<RowPartial> partials;
    parallel_rows(r, g, partials, [&](int row, std::vector<double>& xs, RowPartial& p) {
        for_each_inside_cell(r, g, row, xs, [&](int col) {
            const double v = r.at(row, col);
            if (r.is_nodata(v)) return;
            p.count += 1;
            if (v == code) p.class_count += 1;
        });
    });
    ClassRatio out;
    for (const auto& p : partials) {
        out.valid_cells += p.count;
        out.class_cells += p.class_count;
    }
    out.ratio = out.valid_cells > 0
                    ? static_cast<double>(out.class_cells) / static_cast<double>(out.valid_cells)
                    : 0.0;
    out.warning = out.valid_cells == 0;
    return out;
}

namespace serial {

ZonalStats zonal_stats(const Raster& r, const geo::Geometry& g) {
    ZonalStats out;
    for (int row = 0; row < r.nrows; ++row) {
        for (int col = 0; col < r.ncols; ++col) {
            const double v = r.at(row, col);
            if (r.is_nodata(v)) continue;
            if (!geo::point_in_polygon(r.cell_center(row, col), g)) continue;
            out.sum += v;
            out.valid_cell_count += 1;
        }
    }
    out.mean = out.valid_cell_count > 0 ? out.sum / static_cast<double>(out.valid_cell_count) : 0.0;
    out.warning = out.valid_cell_count == 0;
    return out;
}

ClassRatio class_ratio(const Raster& r, const geo::Geometry& g, int class_code) {
    ClassRatio out;
    const double code = static_cast<double>(class_code);
    for (int row = 0; row < r.nrows; ++row) {
        for (int col = 0; col < r.ncols; ++col) {
            const double v = r.at(row, col);
            if (r.is_nodata(v)) continue;
            if (!geo::point_in_polygon(r.cell_center(row, col), g)) continue;
            out.valid_cells += 1;
            if (v == code) out.class_cells += 1;
        }
    }
    out.ratio = out.valid_cells > 0
                    ? static_cast<double>(out.class_cells) / static_cast<double>(out.valid_cells)
                    : 0.0;
    out.warning = out.valid_cells == 0;
    return out;
}

}  // namespace serial

}  // namespace geoinfer
