#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace hmpc::logic {

enum class VarKind { Input, BinaryAux, ContAux, State };

struct Var {
    int id = -1;
    VarKind kind = VarKind::Input;
};

struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

// Per-variable bounds used to derive big-M constants. Indexed by variable id.
struct Box {
    std::vector<Bounds> bounds;

    const Bounds& at(int id) const { return bounds.at(static_cast<std::size_t>(id)); }
};

// Declaration-ordered variable registry. The declaration order of each kind
// fixes the column order of the assembled constraint matrices.
class VariableTable {
  public:
    Var add_input(const std::string& name, double lo, double hi);
    Var add_state(const std::string& name, double lo, double hi);
    Var add_binary(const std::string& name);
    Var add_cont_aux(const std::string& name, double lo, double hi);

    bool contains(const Var& v) const;
    const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
    VarKind kind(int id) const { return kinds_.at(static_cast<std::size_t>(id)); }
    int count(VarKind k) const;
    // position of a variable within its own kind (its matrix column)
    int column(int id) const { return columns_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(names_.size()); }

    Box declared_box() const;

  private:
    Var add(const std::string& name, VarKind kind, double lo, double hi);

    std::vector<std::string> names_;
    std::vector<VarKind> kinds_;
    std::vector<Bounds> boxes_;
    std::vector<int> columns_;
};

// Affine expression over continuous variables (inputs, states, continuous aux).
struct LinExpr {
    std::map<int, double> coeffs;  // var id -> coefficient
    double constant = 0.0;

    static LinExpr term(const Var& v, double coeff = 1.0);
    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double s);

    double eval(const Eigen::VectorXd& values_by_id) const;
    // interval bounds over the box; throws when any variable is unbounded
    Bounds range(const Box& box) const;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

// One mixed-integer inequality: sum coeff_i * v_i <= rhs.
struct Row {
    std::map<int, double> coeffs;
    double rhs = 0.0;

    bool satisfied(const Eigen::VectorXd& values_by_id, double tol = 1e-9) const;
};

struct IneqSystem {
    std::vector<Row> rows;
    std::vector<Var> created_aux;  // continuous aux registered by the encoder

    bool satisfied(const Eigen::VectorXd& values_by_id, double tol = 1e-9) const;
};

// [d1 = 1] or [d2 = 1]: the single row -d1 - d2 <= -1.
IneqSystem encode_or(const VariableTable& vars, const Var& d1, const Var& d2);

// [d = 1] <-> [e >= 0]. The complement "e < 0" is realized as e <= -eps.
IneqSystem encode_iff_threshold(const VariableTable& vars, const Var& d,
                                const LinExpr& e, const Box& box, double eps = 1e-6);

// [d1 = 1] -> [d2 = 1]
IneqSystem encode_implies(const VariableTable& vars, const Var& d1, const Var& d2);
// d1 = d2 (both implications)
IneqSystem encode_iff_binary(const VariableTable& vars, const Var& d1, const Var& d2);

// z = d * e on the box, via the four standard product rows.
IneqSystem encode_product(const VariableTable& vars, const Var& z, const Var& d,
                          const LinExpr& e, const Box& box);

// F = (1-d)*branch0 + d*branch1. Registers two helper product variables in
// `vars` and ties them to F with an equality pair.
IneqSystem encode_piecewise(VariableTable& vars, const Var& F, const Var& d,
                            const LinExpr& branch0, const LinExpr& branch1,
                            const Box& box);

// plain affine row  e <= ub
IneqSystem encode_leq(const VariableTable& vars, const LinExpr& e, double ub);

// Stacked constraint matrices oriented as
//     E2 * delta + E3 * z <= E1 * u + E4 * x + E5.
struct Assembled {
    Eigen::MatrixXd E1, E2, E3, E4;
    Eigen::VectorXd E5;
    int num_inputs = 0, num_binary = 0, num_cont_aux = 0, num_states = 0;
};

Assembled assemble(const VariableTable& vars, const std::vector<IneqSystem>& systems);

}  // namespace hmpc::logic
