#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lf {

// Error categories map onto CLI exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 5; }
};
struct ConfigError : Error {
    using Error::Error;
    int exit_code() const override { return 2; }
};
struct PrerequisiteError : Error {
    using Error::Error;
    int exit_code() const override { return 3; }
};
struct MissingInputError : Error {
    using Error::Error;
    int exit_code() const override { return 4; }
};
struct InvariantError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};

enum class ModelKind { BrownianMotion, SubordinatedDriftBM, SubordinatorMinusDrift, SymmetricStable };

const char* kind_name(ModelKind k);  // config spelling: brownian, sub_bm, ...
ModelKind kind_from_name(const std::string& s);

struct ModelSpec {
    ModelKind kind = ModelKind::BrownianMotion;
    double alpha = 2.0;  // beta = alpha/2 is the subordinator index
    double a = 0.0;
    bool regular_up = true;
    bool regular_down = true;
    bool symmetric = true;
    double d = 0.0;
    std::optional<double> d_star = 0.0;  // nullopt: estimate required

    // Fills flags and ladder drifts for the kind and checks every invariant.
    static ModelSpec make(ModelKind kind, double alpha, double a,
                          std::optional<double> d_star = std::nullopt);
    void validate() const;
    double beta() const { return alpha / 2; }
    double dstar_or_throw() const;
};

struct TimeGrid {
    std::vector<double> t;
    double T = 0, gamma = 1;
    std::size_t size() const { return t.size(); }
};

TimeGrid build_time_grid(double T, int n, double gamma);

enum class SpaceMode { Linear, Geometric };

struct SpaceGrid {
    std::vector<double> x;
    SpaceMode mode = SpaceMode::Linear;
    std::size_t size() const { return x.size(); }
};

// m intervals, m+1 nodes
SpaceGrid build_space_grid(double x0, double x1, int m, SpaceMode mode);

struct Field2D {
    TimeGrid tg;
    SpaceGrid xg;
    std::vector<double> v;  // row-major [k][j]
    std::string label;

    Field2D() = default;
    Field2D(TimeGrid t, SpaceGrid x, std::string lab);
    double& at(std::size_t k, std::size_t j) { return v[k * xg.size() + j]; }
    double at(std::size_t k, std::size_t j) const { return v[k * xg.size() + j]; }
    std::vector<double> row(std::size_t k) const;
};

// Composite trapezoid over stored nodes; partial end cells use linear interpolation.
double integrate_space(const Field2D& f, std::size_t k, double xa, double xb);
double integrate_time(const Field2D& f, std::size_t j, double ta, double tb);

// Bilinear in (log t, x).
double interpolate(const Field2D& f, double t, double x);

double trapezoid(const std::vector<double>& x, const std::vector<double>& y);
double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double q);

// Values in [-eps*max|v|, 0) become 0; anything lower throws.
void clamp_nonnegative(std::vector<double>& v, const std::string& what, double eps = 1e-12);

std::string fmt17(double v);
void write_field_csv(const Field2D& f, const std::string& path, const std::string& value_name);
Field2D read_field_csv(const std::string& path);  // label is the value column name

// int_x^X of a piecewise-linear function with nodes j*h
double pl_tail(const std::vector<double>& y, double h, double x);
// Writes to a temp file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace lf
