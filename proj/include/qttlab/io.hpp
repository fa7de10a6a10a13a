#pragma once

#include "qttlab/coincidence.hpp"
#include "qttlab/detect.hpp"
#include "qttlab/stability.hpp"
#include "qttlab/twoway.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace qttlab {

// QTT1 tag file, little-endian:
//   "QTT1" | u16 version | u16 channel | u32 lsb_fs | i64 record_epoch_s | u64 count | i64 tags[count]
inline constexpr std::uint16_t kTagFileVersion = 1;

void write_tags(const TimeTagStream& s, std::ostream& out);
TimeTagStream read_tags(std::istream& in);
void write_tags(const TimeTagStream& s, const std::filesystem::path& path);
TimeTagStream read_tags(const std::filesystem::path& path);

// Shortest round-trip decimal.
std::string format_double(double v);

// run_index,epoch_s,t0_ps,sigma_ps,n_ab,n_ba,fwhm_ab_ps,fwhm_ba_ps
void write_offsets_csv(const OffsetSeries& s, std::ostream& out);
// Rows must be ordered by run_index; cycle period is inferred from epoch spacing.
OffsetSeries read_offsets_csv(std::istream& in);

// tau_s,value,estimator,n_terms
void write_stability_csv(const StabilityCurve& c, std::ostream& out);
StabilityCurve read_stability_csv(std::istream& in);

// bin_center_ps,counts
void write_histogram_csv(const Histogram& h, std::ostream& out);
Histogram read_histogram_csv(std::istream& in);

enum class CsvKind { Offsets, Stability, Histogram, Unknown };
// Classifies by header line.
CsvKind sniff_csv(const std::string& first_line);

// Whole-file write through a temporary sibling and rename.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace qttlab
