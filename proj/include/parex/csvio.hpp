#pragma once

#include "parex/excursion.hpp"
#include "parex/mcsim.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace parex {

/// Shortest form is not required; 17 significant digits round-trip exactly.
std::string format_real(double x);
double parse_real(const std::string& s);

/// Header u,y,density; rows u outer, y inner.
void write_density_csv(std::ostream& os, const DensityGrid& g);
/// Recovers the u and y axes from the row order. The spec and method are
/// not stored in the CSV; they come from the manifest.
DensityGrid read_density_csv(std::istream& is);

/// Header u,cdf.
void write_cdf_csv(std::ostream& os, const std::vector<double>& us, const std::vector<double>& cdf);
std::pair<std::vector<double>, std::vector<double>> read_cdf_csv(std::istream& is);

/// Header kind,bin_lo,bin_hi,estimate,stderr. Density rows carry their probe
/// time in the kind column as density:<u>.
void write_mc_csv(std::ostream& os, const std::vector<Histogram>& hist);
std::vector<Histogram> read_mc_csv(std::istream& is);

/// Ordered key=value lines. Blank lines and lines starting with # are skipped.
class KeyValues {
public:
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;  // throws DomainError if absent
    std::string get_or(const std::string& key, const std::string& fallback) const;
    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

    static KeyValues parse(std::istream& is);
    static KeyValues load(const std::string& path);
    void write(std::ostream& os) const;

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

/// Sidecar that records how an output file was produced.
std::string manifest_path(const std::string& output);
std::string utc_timestamp();

extern const char* const kVersion;

}  // namespace parex
