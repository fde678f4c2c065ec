#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "laplace/model_io.hpp"
#include "laplace/models.hpp"

using namespace laplace;

namespace {

bool same_model(const Model& a, const Model& b) {
    if (a.d != b.d || a.L != b.L || a.label != b.label) return false;
    auto same_table = [](const std::map<int, SymTensor>& x, const std::map<int, SymTensor>& y) {
        if (x.size() != y.size()) return false;
        for (const auto& [order, T] : x) {
            auto it = y.find(order);
            if (it == y.end()) return false;
            bool eq = true;
            T.for_each_class([&](std::span<const int> idx, double v) {
                if (it->second.at(idx) != v) eq = false;
            });
            if (!eq) return false;
        }
        return true;
    };
    return same_table(a.f_tensors, b.f_tensors) && same_table(a.logg_tensors, b.logg_tensors);
}

}  // namespace

TEST_CASE("round trip is the identity for the builtins") {
    for (const Model& m : {quartic_model(3, 2).model, random_poly_model(2, 3, 11, 0.2).model}) {
        std::string text = model_to_json(m);
        Model back = model_from_json(text);
        CHECK(same_model(m, back));
        // serialization of the parse is byte-stable
        CHECK(model_to_json(back) == text);
    }
}

TEST_CASE("values survive with full precision") {
    Model m;
    m.d = 1;
    m.L = 2;
    SymTensor T(3, 1);
    T.set({0, 0, 0}, 1.0 / 3.0);
    m.f_tensors.emplace(3, T);
    Model back = model_from_json(model_to_json(m));
    CHECK(back.f_tensor(3)->at({0, 0, 0}) == 1.0 / 3.0);
}

TEST_CASE("parser reports field paths") {
    auto msg = [](const std::string& text) {
        try {
            model_from_json(text);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };

    CHECK(msg("[1,2]").find("top level") != std::string::npos);
    CHECK(msg(R"({"L":2})").find("d: missing") != std::string::npos);
    CHECK(msg(R"({"d":1,"L":2,"bogus":3})").find("bogus") != std::string::npos);
    CHECK(msg(R"({"d":1.5,"L":2})").find("d: expected an integer") != std::string::npos);
    CHECK(msg(R"({"d":0,"L":2})").find("d: must be at least 1") != std::string::npos);

    // order key range depends on L
    CHECK(msg(R"({"d":1,"L":2,"f_derivatives":{"6":[]}})").find("f_derivatives.6") !=
          std::string::npos);
    CHECK(msg(R"({"d":1,"L":2,"f_derivatives":{"x":[]}})").find("not an integer") !=
          std::string::npos);
    CHECK(msg(R"({"d":1,"L":2,"log_g_derivatives":{"4":[]}})").find("log_g_derivatives.4") !=
          std::string::npos);

    // entry shape
    CHECK(msg(R"({"d":2,"L":2,"f_derivatives":{"3":[[[1,1],2.0]]}})")
              .find("f_derivatives.3[0][0]: index list must have length 3") != std::string::npos);
    CHECK(msg(R"({"d":2,"L":2,"f_derivatives":{"3":[[[1,1,3],2.0]]}})")
              .find("index outside 1..2") != std::string::npos);
    CHECK(msg(R"({"d":2,"L":2,"f_derivatives":{"3":[[[2,1,2],2.0]]}})").find("sorted") !=
          std::string::npos);
    CHECK(msg(R"({"d":2,"L":2,"f_derivatives":{"3":[[[1,1,2],1.0],[[1,1,2],2.0]]}})")
              .find("duplicate permutation class") != std::string::npos);
    CHECK(msg(R"({"d":1,"L":2,"f_derivatives":{"3":[[[1,1,1],"x"]]}})")
              .find("f_derivatives.3[0][1]: expected a number") != std::string::npos);
    CHECK(msg("{") != "no error");
}

TEST_CASE("explicit zeros normalize away") {
    Model m = model_from_json(R"({"d":2,"L":2,"f_derivatives":{"3":[[[1,1,2],0.0]]}})");
    CHECK(m.f_tensor(3) == nullptr);
    Model back = model_from_json(model_to_json(m));
    CHECK(same_model(m, back));
}

TEST_CASE("labels round trip with escaping") {
    Model m;
    m.d = 1;
    m.L = 1;
    m.label = "odd \"label\" with \\ chars";
    Model back = model_from_json(model_to_json(m));
    CHECK(back.label == m.label);
}
