#pragma once

#include <string>
#include <vector>

#include "hmvf/sim_engine.hpp"

namespace hmvf {

/// Exact trace CSV header, fixed column order, no locale formatting.
inline constexpr const char* kTraceCsvHeader =
    "t,v_lead,v_follow,gap,s_star,R,eta_c,a_driver,h,h_n,h_a,a_combined,"
    "eps1,eps2,psi_n,psi_a,xi0,xi1,xi2,clamped";

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Column names in CSV order.
const std::vector<std::string>& trace_columns();

/// Value of a named column in a row; throws on unknown names.
double trace_column_value(const TraceRow& row, const std::string& column);

void write_trace_csv(const Trace& tr, const std::string& path);
Trace read_trace_csv(const std::string& path);

}  // namespace hmvf
