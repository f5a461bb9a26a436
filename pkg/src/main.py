#!/usr/bin/env python3
"""
USIM-DAL Entry Point

python -m src.main <command> [options]
"""

import logging
import sys
from typing import List, Optional

from src.cli.commands import build_parser, dispatch

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: str = "INFO") -> None:
    """로그 레벨/포맷 설정"""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)
    logging.getLogger().setLevel(level.upper())


def main(argv: Optional[List[str]] = None) -> int:
    """명령 실행 후 종료 코드 반환"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_level)
    logger.info("=" * 50)
    logger.info(f"USIM-DAL: {args.command}")
    logger.info("=" * 50)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
