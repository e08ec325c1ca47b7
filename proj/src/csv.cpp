#include "geoctl/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace geoctl {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string &field) {
    double v = 0.0;
    const char *first = field.data(), *last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw Error(ErrorKind::InvalidArgument, "malformed number '" + field + "'");
    return v;
}

std::vector<std::string> trajectory_header(int n, int m) {
    std::vector<std::string> h{"t"};
    for (int i = 1; i <= n; ++i) h.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) h.push_back("qd" + std::to_string(i));
    for (int i = 1; i <= m; ++i) h.push_back("u" + std::to_string(i));
    h.insert(h.end(), {"E", "E_Lf", "phi"});
    return h;
}

void write_trajectory_csv(std::ostream &os, const Trajectory &tr) {
    const int n = tr.size() ? static_cast<int>(tr.q[0].size()) : 0;
    const int m = tr.size() ? static_cast<int>(tr.u[0].size()) : 0;
    auto header = trajectory_header(n, m);
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    std::string line;
    for (size_t k = 0; k < tr.size(); ++k) {
        line = format_double(tr.t[k]);
        auto put = [&](double v) {
            line += ',';
            line += format_double(v);
        };
        for (int i = 0; i < n; ++i) put(tr.q[k][i]);
        for (int i = 0; i < n; ++i) put(tr.qd[k][i]);
        for (int i = 0; i < m; ++i) put(tr.u[k][i]);
        put(tr.E[k]);
        put(tr.E_Lf[k]);
        put(tr.phi[k]);
        os << line << '\n';
    }
}

namespace {
std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}
} // namespace

CsvTable read_csv(std::istream &is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::InvalidArgument, "empty CSV");
    t.header = split(line);
    long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != t.header.size())
            throw Error(ErrorKind::InvalidArgument, "CSV line " + std::to_string(lineno) + " has " +
                                                        std::to_string(fields.size()) + " fields, expected " +
                                                        std::to_string(t.header.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto &f : fields) row.push_back(parse_double(f));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Trajectory trajectory_from_csv(const CsvTable &table, int n, int m) {
    if (table.header != trajectory_header(n, m))
        throw Error(ErrorKind::InvalidArgument, "CSV header does not match the trajectory layout");
    Trajectory tr;
    for (const auto &row : table.rows) {
        size_t k = 0;
        tr.t.push_back(row[k++]);
        Vec q(n), qd(n), u(m);
        for (int i = 0; i < n; ++i) q[i] = row[k++];
        for (int i = 0; i < n; ++i) qd[i] = row[k++];
        for (int i = 0; i < m; ++i) u[i] = row[k++];
        tr.q.push_back(q);
        tr.qd.push_back(qd);
        tr.u.push_back(u);
        tr.E.push_back(row[k++]);
        tr.E_Lf.push_back(row[k++]);
        tr.phi.push_back(row[k++]);
    }
    return tr;
}

std::string plot_script(const std::string &csv_name, int n, int m, const std::string &title) {
    std::ostringstream os;
    os << "#!/usr/bin/env python3\n"
          "# Regenerates the figures of one run from its CSV file.\n"
          "import csv\n"
          "import os\n"
          "import sys\n\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n\n"
          "here = os.path.dirname(os.path.abspath(__file__))\n"
          "path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, \""
       << csv_name
       << "\")\n"
          "with open(path) as fh:\n"
          "    rows = list(csv.DictReader(fh))\n"
          "col = lambda k: [float(r[k]) for r in rows]\n"
          "t = col(\"t\")\n\n"
          "fig, ax = plt.subplots(4, 1, figsize=(7, 10), sharex=True)\n";
    os << "for k in [";
    for (int i = 1; i <= n; ++i) os << (i > 1 ? ", " : "") << "\"q" << i << "\"";
    os << "]:\n    ax[0].plot(t, col(k), label=k)\n";
    os << "for k in [";
    for (int i = 1; i <= n; ++i) os << (i > 1 ? ", " : "") << "\"qd" << i << "\"";
    os << "]:\n    ax[1].plot(t, col(k), label=k)\n";
    os << "for k in [";
    for (int i = 1; i <= m; ++i) os << (i > 1 ? ", " : "") << "\"u" << i << "\"";
    os << "]:\n    ax[2].plot(t, col(k), label=k)\n";
    os << "ax[3].plot(t, col(\"E\"), label=\"E\")\n"
          "ax[3].plot(t, col(\"E_Lf\"), label=\"E_Lf\")\n"
          "for a in ax:\n"
          "    a.legend(loc=\"upper right\")\n"
          "    a.grid(True)\n"
          "ax[-1].set_xlabel(\"t\")\n"
          "fig.suptitle(\""
       << title
       << "\")\n"
          "fig.tight_layout()\n"
          "fig.savefig(os.path.splitext(path)[0] + \"_time.png\", dpi=120)\n\n";
    if (n >= 2)
        os << "fig2, ax2 = plt.subplots(figsize=(6, 6))\n"
              "ax2.plot(col(\"q1\"), col(\"q2\"))\n"
              "ax2.set_xlabel(\"q1\")\n"
              "ax2.set_ylabel(\"q2\")\n"
              "ax2.grid(True)\n"
              "fig2.savefig(os.path.splitext(path)[0] + \"_plane.png\", dpi=120)\n";
    return os.str();
}

} // namespace geoctl
