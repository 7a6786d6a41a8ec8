#include "shapefit/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace shapefit {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim spaces
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

SampleSet ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ingest_csv: cannot open " + path);

    std::vector<double> t, y, sigma;
    bool has_sigma = false;
    std::string line;
    int row = 0;
    bool first_data_row = true;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_row(line);
        double v0;
        if (first_data_row && !parse_double(cells[0], v0)) continue;  // header
        if (cells.size() < 2)
            throw std::invalid_argument("ingest_csv: row " + std::to_string(row) +
                                        " needs at least columns t,y");
        double vals[3] = {0, 0, 0};
        const int want = std::min<int>(3, static_cast<int>(cells.size()));
        for (int c = 0; c < want; ++c) {
            if (!parse_double(cells[c], vals[c]))
                throw std::invalid_argument("ingest_csv: row " + std::to_string(row) + ", column " +
                                            std::to_string(c + 1) + " is not a number");
        }
        if (first_data_row) {
            has_sigma = cells.size() >= 3;
            first_data_row = false;
        } else if ((cells.size() >= 3) != has_sigma) {
            throw std::invalid_argument("ingest_csv: row " + std::to_string(row) +
                                        " has an inconsistent column count");
        }
        t.push_back(vals[0]);
        y.push_back(vals[1]);
        if (has_sigma) sigma.push_back(vals[2]);
    }
    if (t.size() < 2) throw std::invalid_argument("ingest_csv: needs at least two data rows");

    std::vector<int> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t[a] < t[b]; });
    std::vector<double> ts(t.size()), ys(t.size()), ss;
    for (std::size_t i = 0; i < order.size(); ++i) {
        ts[i] = t[order[i]];
        ys[i] = y[order[i]];
    }
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (!(ts[i] > ts[i - 1]))
            throw std::invalid_argument("ingest_csv: duplicate design point t=" +
                                        std::to_string(ts[i]));
    if (has_sigma) {
        ss.resize(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) ss[i] = sigma[order[i]];
    }

    auto design = DesignInfo::uniform(std::move(ts));
    if (has_sigma) return make_samples(std::move(design), std::move(ys), std::move(ss));

    SampleSet tmp = make_samples(design, ys, 1.0);
    double est = rice_sigma(tmp);
    if (!(est > 0.0)) est = 1.0;  // constant data
    SampleSet out = make_samples(std::move(design), std::move(ys), est);
    out.sigma_from_data = true;
    return out;
}

void write_curve_csv(const std::string& path, const std::vector<double>& grid,
                     const std::vector<double>& values,
                     const std::optional<std::vector<double>>& sd) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("write_curve_csv: cannot open " + path);
    out.precision(17);
    out << (sd ? "t,value,sd\n" : "t,value\n");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << grid[i] << ',' << values[i];
        if (sd) out << ',' << (*sd)[i];
        out << '\n';
    }
}

void write_long_csv(const std::string& path, const std::vector<LongSeries>& series) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("write_long_csv: cannot open " + path);
    out.precision(17);
    out << "series,t,value\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.t->size(); ++i)
            out << s.name << ',' << (*s.t)[i] << ',' << (*s.value)[i] << '\n';
}

}  // namespace shapefit
