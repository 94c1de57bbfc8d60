import sys
from hamred.hamred import main

if __name__ == "__main__":
    try:
        sys.exit(main())

    except KeyboardInterrupt:
        print("Run aborted.")
        sys.exit(1)
