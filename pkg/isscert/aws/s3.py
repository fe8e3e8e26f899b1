from urllib.parse import urlparse
import io
import os

from .. import S3_SUPPORT
from ..exceptions import ConfigException
from ..utils import mkdir_p

_client = None


def s3_client():
    global _client
    if _client is None:
        if not S3_SUPPORT:
            raise ConfigException('s3:// URIs need boto3')
        import boto3
        _client = boto3.client('s3')
    return _client


def is_s3_uri(uri):
    return urlparse(uri).scheme == 's3'


def join_uri(base, name):
    if is_s3_uri(base):
        return base.rstrip('/') + '/' + name
    return os.path.join(base, name)


def file_to_str(file_uri):
    parsed_uri = urlparse(file_uri)
    if parsed_uri.scheme == 's3':
        with io.BytesIO() as file_buffer:
            s3_client().download_fileobj(
                parsed_uri.netloc, parsed_uri.path[1:], file_buffer)
            return file_buffer.getvalue().decode('utf-8')
    else:
        with open(file_uri, 'r') as file_buffer:
            return file_buffer.read()


def str_to_file(content_str, file_uri):
    parsed_uri = urlparse(file_uri)
    if parsed_uri.scheme == 's3':
        bucket = parsed_uri.netloc
        key = parsed_uri.path[1:]
        with io.BytesIO(bytes(content_str, encoding='utf-8')) as str_buffer:
            s3_client().upload_fileobj(str_buffer, bucket, key)
    else:
        mkdir_p(os.path.dirname(file_uri))
        with open(file_uri, 'w') as content_file:
            content_file.write(content_str)


def file_exists(file_uri):
    parsed_uri = urlparse(file_uri)
    if parsed_uri.scheme == 's3':
        from botocore.exceptions import ClientError
        try:
            s3_client().head_object(Bucket=parsed_uri.netloc, Key=parsed_uri.path[1:])
            return True
        except ClientError:
            return False
    return os.path.isfile(file_uri)
