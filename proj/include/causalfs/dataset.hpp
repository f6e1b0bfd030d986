#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace causalfs {

/// Observational records: decisions x (D x M), outcomes y (D x N) and
/// external features z (D x K), row per record.
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    Eigen::MatrixXd z;

    int rows() const { return static_cast<int>(y.rows()); }
    int x_cols() const { return static_cast<int>(x.cols()); }
    int y_cols() const { return static_cast<int>(y.cols()); }
    int z_cols() const { return static_cast<int>(z.cols()); }

    /// Throws when row counts disagree or any entry is not finite.
    void validate() const;
};

/// Shortest exact decimal form of a double (printf %.17g trimmed by probing
/// shorter precisions that still round-trip).
std::string csv_double(double value);

/// Header "x1,..,xM,y1,..,yN,z1,..,zK" followed by one row per record.
void write_csv(std::ostream& out, const Dataset& data);

/// Parses the layout written by write_csv; column counts are inferred from
/// the header prefixes.
Dataset read_csv(std::istream& in);

Dataset load_csv_file(const std::string& path);
void save_csv_file(const std::string& path, const Dataset& data);

}  // namespace causalfs
