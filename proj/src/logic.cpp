#include "hmpc/logic.hpp"

#include <cmath>
#include <stdexcept>

namespace hmpc::logic {

Var VariableTable::add(const std::string& name, VarKind kind, double lo, double hi) {
    for (const auto& n : names_)
        if (n == name) throw std::invalid_argument("variable redeclared: " + name);
    if (!(lo <= hi)) throw std::invalid_argument("empty bounds for variable: " + name);
    Var v{static_cast<int>(names_.size()), kind};
    columns_.push_back(count(kind));  // position within its kind
    names_.push_back(name);
    kinds_.push_back(kind);
    boxes_.push_back({lo, hi});
    return v;
}

Var VariableTable::add_input(const std::string& name, double lo, double hi) {
    return add(name, VarKind::Input, lo, hi);
}
Var VariableTable::add_state(const std::string& name, double lo, double hi) {
    return add(name, VarKind::State, lo, hi);
}
Var VariableTable::add_binary(const std::string& name) {
    return add(name, VarKind::BinaryAux, 0.0, 1.0);
}
Var VariableTable::add_cont_aux(const std::string& name, double lo, double hi) {
    return add(name, VarKind::ContAux, lo, hi);
}

bool VariableTable::contains(const Var& v) const {
    return v.id >= 0 && v.id < size() && kinds_[static_cast<std::size_t>(v.id)] == v.kind;
}

int VariableTable::count(VarKind k) const {
    int c = 0;
    for (auto kk : kinds_)
        if (kk == k) ++c;
    return c;
}

Box VariableTable::declared_box() const { return Box{boxes_}; }

LinExpr LinExpr::term(const Var& v, double coeff) {
    LinExpr e;
    e.coeffs[v.id] = coeff;
    return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    for (const auto& [id, c] : o.coeffs) coeffs[id] += c;
    constant += o.constant;
    return *this;
}
LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& [id, c] : o.coeffs) coeffs[id] -= c;
    constant -= o.constant;
    return *this;
}
LinExpr& LinExpr::operator*=(double s) {
    for (auto& [id, c] : coeffs) c *= s;
    constant *= s;
    return *this;
}
LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

double LinExpr::eval(const Eigen::VectorXd& values_by_id) const {
    double v = constant;
    for (const auto& [id, c] : coeffs) v += c * values_by_id(id);
    return v;
}

Bounds LinExpr::range(const Box& box) const {
    double lo = constant, hi = constant;
    for (const auto& [id, c] : coeffs) {
        const Bounds& b = box.at(id);
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi))
            throw std::invalid_argument("expression unbounded over the box");
        lo += c > 0 ? c * b.lo : c * b.hi;
        hi += c > 0 ? c * b.hi : c * b.lo;
    }
    return {lo, hi};
}

bool Row::satisfied(const Eigen::VectorXd& values_by_id, double tol) const {
    double lhs = 0.0;
    for (const auto& [id, c] : coeffs) lhs += c * values_by_id(id);
    return lhs <= rhs + tol;
}

bool IneqSystem::satisfied(const Eigen::VectorXd& values_by_id, double tol) const {
    for (const auto& r : rows)
        if (!r.satisfied(values_by_id, tol)) return false;
    return true;
}

namespace {

void require_binary(const VariableTable& vars, const Var& d, const char* who) {
    if (!vars.contains(d) || d.kind != VarKind::BinaryAux)
        throw std::invalid_argument(std::string(who) + ": variable is not a registered binary");
}

void require_known(const VariableTable& vars, const LinExpr& e, const char* who) {
    for (const auto& [id, c] : e.coeffs) {
        (void)c;
        if (id < 0 || id >= vars.size())
            throw std::invalid_argument(std::string(who) + ": expression uses unknown variable");
        if (vars.kind(id) == VarKind::BinaryAux)
            throw std::invalid_argument(std::string(who) + ": expression must be over continuous variables");
    }
}

Row row_from_expr(const LinExpr& e, double rhs) {
    Row r;
    r.coeffs = e.coeffs;
    r.rhs = rhs - e.constant;
    return r;
}

}  // namespace

IneqSystem encode_or(const VariableTable& vars, const Var& d1, const Var& d2) {
    require_binary(vars, d1, "encode_or");
    require_binary(vars, d2, "encode_or");
    IneqSystem s;
    Row r;
    r.coeffs[d1.id] = -1.0;
    r.coeffs[d2.id] = -1.0;
    r.rhs = -1.0;
    s.rows.push_back(std::move(r));
    return s;
}

IneqSystem encode_iff_threshold(const VariableTable& vars, const Var& d,
                                const LinExpr& e, const Box& box, double eps) {
    require_binary(vars, d, "encode_iff_threshold");
    require_known(vars, e, "encode_iff_threshold");
    if (!(eps > 0)) throw std::invalid_argument("encode_iff_threshold: eps must be positive");

    // f = -e;  d=1 -> f <= 0 (e >= 0);  d=0 -> f >= eps (e <= -eps)
    Bounds be = e.range(box);
    const double g = -be.lo;  // sup of -e
    const double l = -be.hi;  // inf of -e

    IneqSystem s;
    {
        // f <= g*(1-d):  -e + g*d <= g
        LinExpr lhs = -1.0 * e;
        Row r = row_from_expr(lhs, g);
        r.coeffs[d.id] += g;
        s.rows.push_back(std::move(r));
    }
    {
        // f >= eps + (l-eps)*d:  e + (l-eps)*d <= -eps
        Row r = row_from_expr(e, -eps);
        r.coeffs[d.id] += l - eps;
        s.rows.push_back(std::move(r));
    }
    return s;
}

IneqSystem encode_implies(const VariableTable& vars, const Var& d1, const Var& d2) {
    require_binary(vars, d1, "encode_implies");
    require_binary(vars, d2, "encode_implies");
    IneqSystem s;
    Row r;
    r.coeffs[d1.id] = 1.0;
    r.coeffs[d2.id] = -1.0;
    r.rhs = 0.0;
    s.rows.push_back(std::move(r));
    return s;
}

IneqSystem encode_iff_binary(const VariableTable& vars, const Var& d1, const Var& d2) {
    IneqSystem s = encode_implies(vars, d1, d2);
    IneqSystem back = encode_implies(vars, d2, d1);
    s.rows.insert(s.rows.end(), back.rows.begin(), back.rows.end());
    return s;
}

IneqSystem encode_product(const VariableTable& vars, const Var& z, const Var& d,
                          const LinExpr& e, const Box& box) {
    if (!vars.contains(z) || z.kind != VarKind::ContAux)
        throw std::invalid_argument("encode_product: z is not a registered continuous aux");
    require_binary(vars, d, "encode_product");
    require_known(vars, e, "encode_product");

    Bounds be = e.range(box);
    const double m = be.lo, M = be.hi;

    IneqSystem s;
    {
        Row r;  // z <= M*d
        r.coeffs[z.id] = 1.0;
        r.coeffs[d.id] = -M;
        r.rhs = 0.0;
        s.rows.push_back(std::move(r));
    }
    {
        Row r;  // z >= m*d
        r.coeffs[z.id] = -1.0;
        r.coeffs[d.id] = m;
        r.rhs = 0.0;
        s.rows.push_back(std::move(r));
    }
    {
        // z <= e - m*(1-d):  z - e - m*d <= -m
        LinExpr lhs = -1.0 * e;
        Row r = row_from_expr(lhs, -m);
        r.coeffs[z.id] += 1.0;
        r.coeffs[d.id] += -m;
        s.rows.push_back(std::move(r));
    }
    {
        // z >= e - M*(1-d):  -z + e + M*d <= M
        Row r = row_from_expr(e, M);
        r.coeffs[z.id] += -1.0;
        r.coeffs[d.id] += M;
        s.rows.push_back(std::move(r));
    }
    return s;
}

IneqSystem encode_piecewise(VariableTable& vars, const Var& F, const Var& d,
                            const LinExpr& branch0, const LinExpr& branch1,
                            const Box& box) {
    if (!vars.contains(F) || F.kind != VarKind::ContAux)
        throw std::invalid_argument("encode_piecewise: F is not a registered continuous aux");
    require_binary(vars, d, "encode_piecewise");

    Bounds b0 = branch0.range(box);
    Bounds b1 = branch1.range(box);
    const std::string base = vars.name(F.id);
    Var z0 = vars.add_cont_aux(base + "_off", std::min(b0.lo, 0.0), std::max(b0.hi, 0.0));
    Var z1 = vars.add_cont_aux(base + "_on", std::min(b1.lo, 0.0), std::max(b1.hi, 0.0));

    // z0 / z1 need big-M ranges over the *original* declared variables only
    IneqSystem s = encode_product(vars, z0, d, branch0, box);
    IneqSystem p1 = encode_product(vars, z1, d, branch1, box);
    s.rows.insert(s.rows.end(), p1.rows.begin(), p1.rows.end());

    // tie: F = branch0 - z0 + z1  (equality as a row pair)
    {
        LinExpr lhs = -1.0 * branch0;
        Row r = row_from_expr(lhs, 0.0);
        r.coeffs[F.id] += 1.0;
        r.coeffs[z0.id] += 1.0;
        r.coeffs[z1.id] += -1.0;
        s.rows.push_back(r);
        for (auto& [id, c] : r.coeffs) c = -c;
        r.rhs = -r.rhs;
        s.rows.push_back(std::move(r));
    }
    s.created_aux = {z0, z1};
    return s;
}

IneqSystem encode_leq(const VariableTable& vars, const LinExpr& e, double ub) {
    for (const auto& [id, c] : e.coeffs) {
        (void)c;
        if (id < 0 || id >= vars.size())
            throw std::invalid_argument("encode_leq: expression uses unknown variable");
    }
    IneqSystem s;
    s.rows.push_back(row_from_expr(e, ub));
    return s;
}

Assembled assemble(const VariableTable& vars, const std::vector<IneqSystem>& systems) {
    Assembled out;
    out.num_inputs = vars.count(VarKind::Input);
    out.num_binary = vars.count(VarKind::BinaryAux);
    out.num_cont_aux = vars.count(VarKind::ContAux);
    out.num_states = vars.count(VarKind::State);

    Eigen::Index rows = 0;
    for (const auto& s : systems) rows += static_cast<Eigen::Index>(s.rows.size());

    out.E1 = Eigen::MatrixXd::Zero(rows, out.num_inputs);
    out.E2 = Eigen::MatrixXd::Zero(rows, out.num_binary);
    out.E3 = Eigen::MatrixXd::Zero(rows, out.num_cont_aux);
    out.E4 = Eigen::MatrixXd::Zero(rows, out.num_states);
    out.E5 = Eigen::VectorXd::Zero(rows);

    Eigen::Index r = 0;
    for (const auto& s : systems) {
        for (const auto& row : s.rows) {
            for (const auto& [id, c] : row.coeffs) {
                if (id < 0 || id >= vars.size())
                    throw std::invalid_argument("assemble: row references unknown variable");
                const int col = vars.column(id);
                switch (vars.kind(id)) {
                    case VarKind::Input: out.E1(r, col) = -c; break;
                    case VarKind::BinaryAux: out.E2(r, col) = c; break;
                    case VarKind::ContAux: out.E3(r, col) = c; break;
                    case VarKind::State: out.E4(r, col) = -c; break;
                }
            }
            out.E5(r) = row.rhs;
            ++r;
        }
    }
    return out;
}

}  // namespace hmpc::logic
