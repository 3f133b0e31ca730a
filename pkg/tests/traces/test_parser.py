import pytest

from traces.parser import parse_traces, serialize_traces, split_metadata
from traces.schema import ColumnMapping, FreqMode
from utils.errors import SchemaError

HEADER = "Workflow,Task,Machine,Realtime,InputSizeCompressed,InputSizeUncompressed,FreqMode,PartitionLabel\n"


def test_single_valid_row_maps_fields():
    result = parse_traces(HEADER + "eager,fastqc,local,120000,2014,4808,Normal,p1\n")

    assert result.errors == []
    [record] = result.records
    assert record.task == "fastqc"
    assert record.input_size_uncompressed == 4808
    assert record.input_size_compressed == 2014
    assert record.runtime == 120000.0
    assert record.freq_mode is FreqMode.NORMAL
    assert record.partition_label == "p1"


def test_non_numeric_runtime_is_a_row_error():
    result = parse_traces(HEADER + "eager,fastqc,local,abc,2014,4808,Normal,p1\n")

    assert result.records == []
    assert len(result.errors) == 1
    assert result.errors[0].row == 1
    assert result.errors[0].column == "Realtime"


def test_malformed_rows_are_skipped_and_order_kept():
    rows = [f"wf,task{i},local,{1000 + i},10,20,Normal,p{i}\n" for i in range(10)]
    rows[3] = "wf,task3,local,-5,10,20,Normal,p3\n"
    rows[7] = "wf,task7,local,1007,ten,20,Normal,p7\n"

    result = parse_traces(HEADER + "".join(rows))

    assert [r.task for r in result.records] == [f"task{i}" for i in range(10) if i not in (3, 7)]
    assert sorted({e.row for e in result.errors}) == [4, 8]


def test_row_with_extra_fields_is_a_row_error():
    rows = [f"wf,task{i},local,{1000 + i},10,20,Normal,p{i}\n" for i in range(10)]
    rows[4] = "wf,task4,local,1004,10,20,Normal,p4,surplus\n"

    result = parse_traces(HEADER + "".join(rows))

    assert [r.task for r in result.records] == [f"task{i}" for i in range(10) if i != 4]
    assert [(e.row, e.message) for e in result.errors] == [(5, "expected 8 fields, found 9")]


def test_extra_fields_in_first_row_do_not_shift_columns():
    result = parse_traces(
        HEADER + "wf,a,local,1000,10,20,Normal,p1,x,y\n" + "wf,b,local,2000,10,20,Normal,p2\n"
    )

    [record] = result.records
    assert (record.task, record.runtime, record.partition_label) == ("b", 2000.0, "p2")
    assert [e.row for e in result.errors] == [1]


def test_missing_required_column_is_a_schema_error():
    with pytest.raises(SchemaError, match="FreqMode"):
        parse_traces("Workflow,Task,Machine,Realtime,InputSizeCompressed,InputSizeUncompressed,PartitionLabel\n")


def test_both_sizes_absent_is_rejected():
    result = parse_traces(HEADER + "eager,fastqc,local,100,,,Normal,p1\n")

    assert result.records == []
    assert "both input sizes" in result.errors[0].message


def test_inverted_sizes_only_warn():
    result = parse_traces(HEADER + "eager,gunzip,local,100,5000,4000,Reduced,p1\n")

    assert len(result.records) == 1
    assert result.records[0].size_inverted
    assert result.warnings


def test_metadata_header_and_units():
    content = "# freq_old = 2400\n# freq_new = 1900\n" + HEADER.replace(",", ";") + "wf;t;n;1.5;1;2;reduced;p1\n"
    schema = ColumnMapping(delimiter=";", size_unit="MB", runtime_unit="s")

    result = parse_traces(content, schema)

    assert result.metadata_float("freq_old") == 2400.0
    assert result.metadata_float("freq_new") == 1900.0
    [record] = result.records
    assert record.runtime == 1500.0
    assert record.input_size_uncompressed == 2_000_000
    assert record.freq_mode is FreqMode.REDUCED


def test_split_metadata_leaves_body():
    metadata, body = split_metadata("# a = 1\n#b=two\nx,y\n1,2\n")

    assert metadata == {"a": "1", "b": "two"}
    assert body == "x,y\n1,2\n"


def test_serialize_then_parse_is_identity(synthetic_cluster):
    records = synthetic_cluster()

    text = serialize_traces(records, metadata={"freq_old": 2000, "freq_new": 1600})
    result = parse_traces(text)

    assert result.errors == []
    assert result.records == records
    assert result.metadata == {"freq_old": "2000", "freq_new": "1600"}


def test_unknown_unit_is_rejected():
    with pytest.raises(ValueError, match="size_unit"):
        ColumnMapping(size_unit="parsecs")
