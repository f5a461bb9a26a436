"""
Exception Hierarchy

CLI 종료 코드(2: 인자 오류, 3: IO 오류, 4: 수치 오류)와 연결되는 예외 정의
"""


class UsimDalError(Exception):
    """패키지 공통 예외"""


class ConfigError(UsimDalError, ValueError):
    """설정/인자 검증 실패 (exit 2)"""


class ShapeError(UsimDalError, ValueError):
    """텐서/이미지 shape 불일치"""


class DataIOError(UsimDalError, OSError):
    """파일 입출력 실패 (exit 3)"""


class ImageIOError(DataIOError):
    """손상되었거나 읽을 수 없는 이미지"""


class UnsupportedImageError(ImageIOError):
    """지원하지 않는 비트 깊이/모드"""


class ManifestError(DataIOError):
    """매니페스트 형식 오류 또는 참조 파일 누락"""


class CheckpointError(DataIOError):
    """체크포인트 형식 오류 또는 CRC 불일치"""


class LabelingOracleError(DataIOError):
    """선택된 샘플에 HR 레이블이 없음"""


class InfinitePSNRError(UsimDalError, ValueError):
    """두 이미지가 같아 PSNR이 정의되지 않음"""


class PBoostUndefinedError(UsimDalError, ValueError):
    """SIM+Random과 SIM의 PSNR이 같아 pboost 분모가 0"""


class NumericalError(UsimDalError, ArithmeticError):
    """수치 계산 실패 (exit 4)"""


class TrainingDivergedError(NumericalError):
    """학습 중 손실이 유한하지 않음"""


EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_ARGUMENT = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def exit_code_for(exc: BaseException) -> int:
    """예외를 CLI 종료 코드로 변환"""
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, (DataIOError, OSError)):
        return EXIT_IO
    if isinstance(exc, ValueError):
        return EXIT_ARGUMENT
    return EXIT_UNEXPECTED
