#include <doctest.h>

#include <random>
#include <sstream>

#include "vcergm/dyngraph.hpp"
#include "vcergm/errors.hpp"

using namespace vcergm;

TEST_SUITE("dyngraph") {

TEST_CASE("undirected graphs are symmetric and store each dyad once") {
    Graph g(4, false);
    g.set_edge(2, 0, true);
    CHECK(g.has_edge(0, 2));
    CHECK(g.has_edge(2, 0));
    CHECK(g.edge_count() == 1);
    CHECK(g.dyad_count() == 6);
    g.set_edge(0, 2, false);
    CHECK_FALSE(g.has_edge(2, 0));
}

TEST_CASE("directed graphs keep both orientations apart") {
    Graph g(3, true);
    g.set_edge(0, 1, true);
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 0));
    CHECK(g.dyad_count() == 6);
}

TEST_CASE("self-loops and out-of-range nodes are rejected") {
    Graph g(3, true);
    CHECK_THROWS_AS(g.set_edge(1, 1, true), UsageError);
    CHECK_THROWS_AS(g.set_edge(0, 3, true), UsageError);
    CHECK_THROWS_AS(g.has_edge(-1, 0), UsageError);
    CHECK_THROWS_AS(Graph(0, true), UsageError);
}

TEST_CASE("dyad enumeration matches the dyad count and canonical order") {
    for (int n = 1; n <= 6; ++n) {
        for (bool directed : {true, false}) {
            const auto list = dyad_list(n, directed);
            CHECK(list.size() == dyad_count(n, directed));
            CHECK(list.size() == static_cast<std::size_t>(directed ? n * (n - 1) : n * (n - 1) / 2));
            Graph g(n, directed);
            std::size_t k = 0;
            g.for_each_dyad([&](int i, int j) {
                REQUIRE(k < list.size());
                CHECK(list[k] == std::make_pair(i, j));
                ++k;
            });
            CHECK(k == list.size());
        }
    }
}

TEST_CASE("dynamic networks sort by time and validate") {
    std::vector<Snapshot> s{{2.0, Graph(3, true)}, {1.0, Graph(4, true)}};
    DynamicNetwork net(s, true);
    CHECK(net.times() == std::vector<double>{1.0, 2.0});
    CHECK(net[0].graph.n() == 4);
    CHECK(net.total_dyads() == 12 + 6);

    CHECK_THROWS_AS(DynamicNetwork({}, true), DataError);
    CHECK_THROWS_AS(DynamicNetwork({{1.0, Graph(3, true)}, {1.0, Graph(3, true)}}, true), DataError);
    CHECK_THROWS_AS(DynamicNetwork({{1.0, Graph(3, false)}}, true), DataError);
}

TEST_CASE("without() drops the listed positions") {
    std::vector<Snapshot> s;
    for (int k = 0; k < 5; ++k) s.push_back({double(k), Graph(3, false)});
    DynamicNetwork net(s, false);
    const std::vector<std::size_t> gone{1, 3};
    CHECK(net.without(gone).times() == std::vector<double>{0, 2, 4});
}

TEST_CASE("read_edge_list transcribes rows") {
    std::istringstream in("time,from,to,node_count\n0,1,2,3\n0,2,3,3\n1,1,2,3\n");
    const auto net = read_edge_list(in, false);
    REQUIRE(net.size() == 2);
    CHECK(net[0].time == 0.0);
    CHECK(net[0].graph.has_edge(0, 1));
    CHECK(net[0].graph.has_edge(1, 2));
    CHECK(net[0].graph.edge_count() == 2);
    CHECK(net[1].graph.edge_count() == 1);
}

TEST_CASE("directed files keep both orientations; duplicates are idempotent") {
    std::istringstream in("time,from,to,node_count\n5,1,2,3\n5,2,1,3\n5,1,2,3\n");
    const auto net = read_edge_list(in, true);
    CHECK(net[0].graph.has_edge(0, 1));
    CHECK(net[0].graph.has_edge(1, 0));
    CHECK(net[0].graph.edge_count() == 2);
}

TEST_CASE("registry lines declare empty snapshots; comments are skipped") {
    std::istringstream in("# a comment\n#nodes,3,5\ntime,from,to,node_count\n1,1,2,\n");
    const auto net = read_edge_list(in, false);
    REQUIRE(net.size() == 2);
    CHECK(net[0].graph.n() == 2);  // max label without registry or column
    CHECK(net[1].time == 3.0);
    CHECK(net[1].graph.n() == 5);
    CHECK(net[1].graph.edge_count() == 0);
}

TEST_CASE("malformed edge lists raise DataError") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_edge_list(in, true);
    };
    CHECK_THROWS_AS(parse(""), DataError);
    CHECK_THROWS_AS(parse("time,from,to,node_count\n"), DataError);
    CHECK_THROWS_AS(parse("t,f,t,n\n1,1,2,3\n"), DataError);
    CHECK_THROWS_AS(parse("time,from,to,node_count\n1,2,2,3\n"), DataError);
    CHECK_THROWS_AS(parse("time,from,to,node_count\n1,1,4,3\n"), DataError);
    CHECK_THROWS_AS(parse("time,from,to,node_count\n1,0,2,3\n"), DataError);
    CHECK_THROWS_AS(parse("time,from,to,node_count\n1,1,2,3\n1,2,3,4\n"), DataError);
    CHECK_THROWS_AS(parse("#nodes,1,4\ntime,from,to,node_count\n1,1,2,3\n"), DataError);
    CHECK_THROWS_AS(parse("time,from,to,node_count\n1,x,2,3\n"), DataError);
}

TEST_CASE("write then read reproduces any dynamic network") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const bool directed = trial % 2 == 0;
        std::vector<Snapshot> snaps;
        for (int k = 0; k < 4; ++k) {
            const int n = 2 + static_cast<int>(rng() % 6);
            Graph g(n, directed);
            const double density = k == 2 ? 0.0 : 0.4;  // keep one empty snapshot
            for (auto [i, j] : dyad_list(n, directed))
                g.set_edge(i, j, std::uniform_real_distribution<>(0, 1)(rng) < density);
            snaps.push_back({0.25 * k + 0.1 * trial, std::move(g)});
        }
        const DynamicNetwork net(snaps, directed);
        std::stringstream buf;
        write_edge_list(buf, net);
        CHECK(read_edge_list(buf, directed) == net);
    }
}

}
