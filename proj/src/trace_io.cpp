#include "hmvf/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace hmvf {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s, long row) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("trace csv row " + std::to_string(row) +
                                 ": malformed number '" + s + "'");
    }
    return v;
}

}  // namespace

const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> cols = {
        "t",    "v_lead", "v_follow", "gap",  "s_star",     "R",
        "eta_c", "a_driver", "h",     "h_n",  "h_a",        "a_combined",
        "eps1", "eps2",   "psi_n",    "psi_a", "xi0",       "xi1",
        "xi2",  "clamped"};
    return cols;
}

double trace_column_value(const TraceRow& r, const std::string& column) {
    if (column == "t") return r.t;
    if (column == "v_lead") return r.v_lead;
    if (column == "v_follow") return r.v_follow;
    if (column == "gap") return r.gap;
    if (column == "s_star") return r.s_star;
    if (column == "R") return r.reaction_time;
    if (column == "eta_c") return r.eta_c;
    if (column == "a_driver") return r.a_driver;
    if (column == "h") return r.h;
    if (column == "h_n") return r.h_n;
    if (column == "h_a") return r.h_a;
    if (column == "a_combined") return r.a_combined;
    if (column == "eps1") return r.eps1;
    if (column == "eps2") return r.eps2;
    if (column == "psi_n") return r.psi_n;
    if (column == "psi_a") return r.psi_a;
    if (column == "xi0") return r.xi0;
    if (column == "xi1") return r.xi1;
    if (column == "xi2") return r.xi2;
    if (column == "clamped") return r.clamped ? 1.0 : 0.0;
    throw std::invalid_argument("unknown trace column: " + column);
}

void write_trace_csv(const Trace& tr, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << kTraceCsvHeader << '\n';
    for (const TraceRow& r : tr.rows) {
        out << format_double(r.t) << ',' << format_double(r.v_lead) << ','
            << format_double(r.v_follow) << ',' << format_double(r.gap) << ','
            << format_double(r.s_star) << ',' << format_double(r.reaction_time)
            << ',' << format_double(r.eta_c) << ',' << format_double(r.a_driver)
            << ',' << format_double(r.h) << ',' << format_double(r.h_n) << ','
            << format_double(r.h_a) << ',' << format_double(r.a_combined) << ','
            << format_double(r.eps1) << ',' << format_double(r.eps2) << ','
            << format_double(r.psi_n) << ',' << format_double(r.psi_a) << ','
            << format_double(r.xi0) << ',' << format_double(r.xi1) << ','
            << format_double(r.xi2) << ',' << (r.clamped ? '1' : '0') << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open trace file: " + path);
    }
    std::string line;
    long row_no = 1;
    if (!std::getline(in, line) || line != kTraceCsvHeader) {
        throw std::runtime_error("trace csv: bad header in " + path);
    }

    Trace tr;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::string> fields;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (fields.size() != trace_columns().size()) {
            throw std::runtime_error("trace csv row " + std::to_string(row_no) +
                                     ": expected " +
                                     std::to_string(trace_columns().size()) +
                                     " fields");
        }
        TraceRow r;
        std::size_t k = 0;
        r.t = parse_double(fields[k++], row_no);
        r.v_lead = parse_double(fields[k++], row_no);
        r.v_follow = parse_double(fields[k++], row_no);
        r.gap = parse_double(fields[k++], row_no);
        r.s_star = parse_double(fields[k++], row_no);
        r.reaction_time = parse_double(fields[k++], row_no);
        r.eta_c = parse_double(fields[k++], row_no);
        r.a_driver = parse_double(fields[k++], row_no);
        r.h = parse_double(fields[k++], row_no);
        r.h_n = parse_double(fields[k++], row_no);
        r.h_a = parse_double(fields[k++], row_no);
        r.a_combined = parse_double(fields[k++], row_no);
        r.eps1 = parse_double(fields[k++], row_no);
        r.eps2 = parse_double(fields[k++], row_no);
        r.psi_n = parse_double(fields[k++], row_no);
        r.psi_a = parse_double(fields[k++], row_no);
        r.xi0 = parse_double(fields[k++], row_no);
        r.xi1 = parse_double(fields[k++], row_no);
        r.xi2 = parse_double(fields[k++], row_no);
        r.clamped = parse_double(fields[k++], row_no) != 0.0;
        tr.rows.push_back(r);
    }
    if (tr.rows.size() >= 2) {
        tr.log_interval = tr.rows[1].t - tr.rows[0].t;
    }
    if (!tr.rows.empty() && tr.rows.back().gap <= 0.0) {
        tr.collided = true;
        tr.collision_time = tr.rows.back().t;
    }
    return tr;
}

}  // namespace hmvf
