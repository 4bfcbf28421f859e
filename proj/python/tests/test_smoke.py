import pytest

import velomule


@pytest.fixture
def data_dir(tmp_path):
    (tmp_path / "station.csv").write_text(
        "station_id,name,lat,long,dockcount,landmark,installation\n"
        "2,Diridon,37.3297,-121.9018,10,San Jose,8/6/2013\n"
        "3,Civic Center,37.3307,-121.8889,15,San Jose,8/5/2013\n"
    )
    (tmp_path / "status.csv").write_text(
        "station_id,bikes_available,docks_available,time\n"
        "2,2,8,2016-05-25 15:45:00\n"
        "2,4,6,2016-05-31 15:45:00\n"
        "2,2,8,2016-05-01 15:45:00\n"
    )
    (tmp_path / "trip.csv").write_text(
        "trip_id,duration,start_date,start_station_id,end_date,end_station_id\n"
        "1,300,2016-05-02 09:00:00,2,2016-05-02 09:05:00,3\n"
        "2,600,2016-05-03 09:00:00,2,2016-05-03 09:10:00,3\n"
        "3,900,2016-05-04 09:00:00,3,2016-05-04 09:15:00,2\n"
    )
    return tmp_path


def test_timestamps():
    assert velomule.parse_timestamp("2016-06-01 15:45:00") == "2016-06-01 15:45:00"
    assert velomule.weekday("2016-06-01 15:45:00") == "Wednesday"
    with pytest.raises(velomule.ParseError):
        velomule.parse_timestamp("2016-13-01 00:00:00")


def test_analytics(data_dir):
    store = velomule.load(str(data_dir))
    assert store.station_ids == [2, 3]
    assert store.trip_count == 3

    wait = store.wait(2, "2016-06-01T15:45:00")
    assert len(wait["points"]) == 31
    assert wait["points"][0]["probability"] == pytest.approx(0.3)

    assert store.forecast(2, "2016-06-01")["n_expected"] == pytest.approx(3.0)
    assert store.trip_time(2, 3)["mean_seconds"] == 600
    assert store.route(2, 3)["trips"] == 3
    assert store.busyness(3)["busyness"] == 3
    assert [r["station_id"] for r in store.rank(2)] == [2, 3]
    assert store.load_factor(2, "2016-05-26 00:00:00")["load_factor"] == 10

    with pytest.raises(velomule.UnknownStation):
        store.busyness(999)
    with pytest.raises(velomule.NoData):
        store.load_factor(3, "2016-06-01 00:00:00")
    with pytest.raises(velomule.ConfigError):
        store.forecast(2, "2016-06-01", weights=(0.5, 0.5, 0.5))


def test_simulator():
    assert velomule.offload([5, 2, 9], 100) == [(2, 34), (5, 33), (9, 33)]
    a = velomule.simulate(10, seed=42)
    b = velomule.simulate(10, seed=42)
    assert a["trace"] == b["trace"]
    assert sum(a["sent_by_bike"].values()) == sum(a["received_by_station"].values())
    assert velomule.simulate(10, seed=43)["trace"] != a["trace"]
