import json
import os

import numpy as np
import pytest

from isscert.aws import s3
from isscert.decorators import timed
from isscert.exceptions import ConfigException
from isscert.utils import as_matrix, config_hash, mkdir_p, sym_sqrt, to_jsonable


class StubClient(object):
    def __init__(self):
        self.objects = {}

    def upload_fileobj(self, fileobj, bucket, key):
        self.objects[(bucket, key)] = fileobj.read()

    def download_fileobj(self, bucket, key, fileobj):
        fileobj.write(self.objects[(bucket, key)])

    def head_object(self, Bucket, Key):
        from botocore.exceptions import ClientError
        if (Bucket, Key) not in self.objects:
            raise ClientError({'Error': {'Code': '404'}}, 'HeadObject')
        return {}


@pytest.fixture
def stub(monkeypatch):
    client = StubClient()
    monkeypatch.setattr(s3, 's3_client', lambda: client)
    return client


def test_local_files(tmpdir):
    uri = str(tmpdir.join('nested', 'dir', 'report.txt'))
    assert not s3.file_exists(uri)
    s3.str_to_file('program status\n', uri)
    assert s3.file_exists(uri)
    assert s3.file_to_str(uri) == 'program status\n'


def test_join_uri():
    assert s3.join_uri('s3://bucket/run/', 'model.json') == 's3://bucket/run/model.json'
    assert s3.join_uri('/tmp/run', 'model.json') == os.path.join('/tmp/run', 'model.json')
    assert s3.is_s3_uri('s3://bucket/key')
    assert not s3.is_s3_uri('/tmp/key')


def test_s3_files(stub):
    s3.str_to_file('{"seed": 1}', 's3://bucket/run/experiment.json')
    assert stub.objects[('bucket', 'run/experiment.json')] == b'{"seed": 1}'
    assert s3.file_to_str('s3://bucket/run/experiment.json') == '{"seed": 1}'
    assert s3.file_exists('s3://bucket/run/experiment.json')
    assert not s3.file_exists('s3://bucket/run/model.json')


def test_mkdir_p(tmpdir):
    path = str(tmpdir.join('a', 'b'))
    mkdir_p(path)
    mkdir_p(path)
    assert os.path.isdir(path)
    mkdir_p('')


def test_to_jsonable():
    data = {1: np.arange(3), 'flag': np.bool_(True), 'pair': (np.float64(0.5), np.int64(2))}
    converted = to_jsonable(data)
    assert json.loads(json.dumps(converted)) == {'1': [0, 1, 2], 'flag': True, 'pair': [0.5, 2]}


def test_config_hash():
    config = {'seed': 1, 'output_dir': 'a', 'delta': 1.0}
    assert config_hash(config) == config_hash(dict(config, output_dir='b'))
    assert config_hash(config) != config_hash(dict(config, seed=2))
    assert config_hash({'b': 1, 'a': 2}) == config_hash({'a': 2, 'b': 1})


def test_as_matrix():
    assert as_matrix([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(ValueError):
        as_matrix([[1.0, 2.0]], rows=2)
    with pytest.raises(ValueError):
        as_matrix([[1.0, 2.0]], cols=3)


def test_sym_sqrt():
    matrix = np.array([[4.0, 1.0], [1.0, 3.0]])
    root = sym_sqrt(matrix)
    np.testing.assert_allclose(root @ root, matrix, atol=1e-12)
    inverse = sym_sqrt(matrix, inverse=True)
    np.testing.assert_allclose(inverse @ matrix @ inverse, np.eye(2), atol=1e-12)


class Result(object):
    def __init__(self, stats):
        self.stats = stats


def test_timed_records_time():
    @timed
    def stage(stats):
        return Result(stats)

    assert stage.__name__ == 'stage'
    assert stage({}).stats['time'] >= 0.0
    assert stage({'time': -1.0}).stats['time'] == -1.0
    assert stage(None).stats is None


def test_s3_decodes_utf8(stub):
    stub.objects[('bucket', 'log.txt')] = '\u00df'.encode('utf-8')
    assert s3.file_to_str('s3://bucket/log.txt') == '\u00df'


def test_s3_needs_boto3(monkeypatch):
    monkeypatch.setattr(s3, '_client', None)
    monkeypatch.setattr(s3, 'S3_SUPPORT', False)
    with pytest.raises(ConfigException):
        s3.file_to_str('s3://bucket/log.txt')
